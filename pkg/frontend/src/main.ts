import { AgentBusyError, ping, postChat, streamTrace } from "./api.js";
import { renderAgentMessage, renderBanner, renderUserMessage } from "./render.js";
import { DEFAULT_SETTINGS, settingsFromParams, validateBaseUrl } from "./settings.js";
import { TraceStore } from "./trace.js";
import type { UiSettings } from "./types.js";

const settings: UiSettings = settingsFromParams(
  new URLSearchParams(window.location.search),
  loadStoredSettings(),
);

function loadStoredSettings(): UiSettings {
  try {
    const raw = window.localStorage.getItem("opsbench-chat-settings");
    if (raw) return { ...DEFAULT_SETTINGS, ...(JSON.parse(raw) as Partial<UiSettings>) };
  } catch {
    // corrupted storage falls back to defaults
  }
  return { ...DEFAULT_SETTINGS };
}

function storeSettings(): void {
  window.localStorage.setItem("opsbench-chat-settings", JSON.stringify(settings));
}

const conversation = document.getElementById("conversation") as HTMLElement;
const form = document.getElementById("composer") as HTMLFormElement;
const input = document.getElementById("question") as HTMLTextAreaElement;
const sendButton = document.getElementById("send") as HTMLButtonElement;
const bannerHost = document.getElementById("banner-host") as HTMLElement;
const serviceInput = document.getElementById("service-url") as HTMLInputElement;
const backendInput = document.getElementById("backend-id") as HTMLInputElement;
const memoryToggle = document.getElementById("memory-toggle") as HTMLInputElement;
const themeToggle = document.getElementById("theme-toggle") as HTMLInputElement;

let sessionId = `ui-${Math.random().toString(36).slice(2)}`;
let busy = false;

function applyTheme(): void {
  document.body.dataset.theme = settings.theme;
}

function syncSettingsPanel(): void {
  serviceInput.value = settings.serviceBaseUrl;
  backendInput.value = settings.backendId;
  memoryToggle.checked = settings.memoryEnabled;
  themeToggle.checked = settings.theme === "light";
  applyTheme();
}

function updateSendState(): void {
  sendButton.disabled = busy || input.value.trim().length === 0;
}

function showBanner(message: string, onRetry?: () => void): void {
  bannerHost.replaceChildren(renderBanner(message, onRetry));
}

function clearBanner(): void {
  bannerHost.replaceChildren();
}

async function sendQuestion(): Promise<void> {
  const text = input.value.trim();
  if (!text || busy) return;
  busy = true;
  updateSendState();
  clearBanner();

  conversation.appendChild(renderUserMessage(text));
  const store = new TraceStore();
  let agentNode = renderAgentMessage(store.view(), settings);
  conversation.appendChild(agentNode);
  const repaint = () => {
    const next = renderAgentMessage(store.view(), settings);
    conversation.replaceChild(next, agentNode);
    agentNode = next;
    conversation.scrollTop = conversation.scrollHeight;
  };
  repaint();

  try {
    const handle = await postChat(
      settings.serviceBaseUrl,
      text,
      settings.backendId,
      settings.memoryEnabled ? sessionId : undefined,
    );
    // One reconnect on a dropped stream; the replay-from-zero contract plus
    // seq dedup makes the second pass render identically.
    for (let attempt = 0; attempt < 2; attempt++) {
      try {
        await streamTrace(settings.serviceBaseUrl, handle.traceId, (event) => {
          store.add(event);
          repaint();
        });
        break;
      } catch (error) {
        if (attempt === 1) throw error;
      }
    }
    input.value = "";
  } catch (error) {
    if (error instanceof AgentBusyError) {
      showBanner("agent busy - try again in a moment", () => void sendQuestion());
    } else {
      showBanner(`service unreachable: ${String(error)}`, () => void sendQuestion());
    }
  } finally {
    busy = false;
    updateSendState();
  }
}

form.addEventListener("submit", (event) => {
  event.preventDefault();
  void sendQuestion();
});
input.addEventListener("input", updateSendState);
input.addEventListener("keydown", (event) => {
  if (event.key === "Enter" && !event.shiftKey) {
    event.preventDefault();
    void sendQuestion();
  }
});

serviceInput.addEventListener("change", () => {
  try {
    settings.serviceBaseUrl = validateBaseUrl(serviceInput.value);
    clearBanner();
  } catch (error) {
    showBanner(`invalid service URL: ${String(error)}`);
    return;
  }
  storeSettings();
});
backendInput.addEventListener("change", () => {
  settings.backendId = backendInput.value.trim() || DEFAULT_SETTINGS.backendId;
  storeSettings();
});
memoryToggle.addEventListener("change", () => {
  settings.memoryEnabled = memoryToggle.checked;
  sessionId = `ui-${Math.random().toString(36).slice(2)}`; // fresh context
  storeSettings();
});
themeToggle.addEventListener("change", () => {
  settings.theme = themeToggle.checked ? "light" : "dark";
  storeSettings();
  applyTheme();
});

syncSettingsPanel();
updateSendState();
void ping(settings.serviceBaseUrl).then((ok) => {
  if (!ok) showBanner("service unreachable - check the service URL in settings");
});
