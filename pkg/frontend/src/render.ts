import { artifactUrl, extractArtifactNames, isImageArtifact } from "./artifacts.js";
import type { StepCard, TraceView, UiSettings } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text; // verbatim, never interpreted
  return node;
}

export function renderUserMessage(text: string): HTMLElement {
  const bubble = el("div", "msg user");
  bubble.appendChild(el("div", "msg-text", text));
  return bubble;
}

function renderCard(card: StepCard, index: number): HTMLElement {
  const node = el("details", "step-card");
  const summaryText = card.action ? card.action : "reasoning";
  const summary = el("summary");
  summary.appendChild(el("span", "step-no", `step ${index + 1}`));
  summary.appendChild(el("span", card.action ? "tool-name" : "step-label", summaryText));
  node.appendChild(summary);
  if (card.thought) node.appendChild(el("div", "thought", card.thought));
  if (card.actionInput !== undefined) {
    node.appendChild(el("pre", "action-input", card.actionInput));
  }
  if (card.observation !== undefined) {
    node.appendChild(el("pre", "observation", card.observation));
  }
  return node;
}

function renderArtifacts(answer: string, settings: UiSettings): HTMLElement | null {
  const names = extractArtifactNames(answer);
  if (names.length === 0) return null;
  const wrap = el("div", "artifacts");
  for (const name of names) {
    const url = artifactUrl(settings.serviceBaseUrl, name);
    if (isImageArtifact(name)) {
      const img = el("img", "artifact-image");
      img.src = url;
      img.alt = name;
      wrap.appendChild(img);
    } else {
      const link = el("a", "artifact-link", `download ${name}`);
      link.href = url;
      link.download = name;
      wrap.appendChild(link);
    }
  }
  return wrap;
}

export function renderAgentMessage(view: TraceView, settings: UiSettings): HTMLElement {
  const bubble = el("div", "msg agent");
  if (view.partial) bubble.appendChild(el("div", "badge partial", "partial trace"));
  if (view.cards.length > 0) {
    const steps = el("div", "steps");
    view.cards.forEach((card, i) => steps.appendChild(renderCard(card, i)));
    bubble.appendChild(steps);
  }
  if (view.error !== undefined) {
    const err = el("div", "msg-text error-card");
    err.appendChild(el("span", "badge error-badge", "failed"));
    err.appendChild(el("span", undefined, view.error));
    bubble.appendChild(err);
  } else if (view.finalAnswer !== undefined) {
    bubble.appendChild(el("div", "msg-text", view.finalAnswer));
    const artifacts = renderArtifacts(view.finalAnswer, settings);
    if (artifacts) bubble.appendChild(artifacts);
  } else {
    bubble.appendChild(el("div", "msg-text pending", "thinking..."));
  }
  return bubble;
}

export function renderBanner(message: string, onRetry?: () => void): HTMLElement {
  const banner = el("div", "banner", message);
  if (onRetry) {
    const button = el("button", "retry", "retry");
    button.addEventListener("click", onRetry);
    banner.appendChild(button);
  }
  return banner;
}
