import type { StepCard, TraceEvent, TraceView } from "./types.js";

/**
 * Accumulates stream events with at-least-once delivery semantics:
 * duplicates (by seq) are dropped, out-of-order arrivals are reordered,
 * and holes in the seq space mark the trace as partial.
 */
export class TraceStore {
  private events = new Map<number, TraceEvent>();

  add(event: TraceEvent): void {
    if (!Number.isInteger(event.seq) || event.seq < 0) return;
    if (this.events.has(event.seq)) return; // client-side dedup on reconnect
    this.events.set(event.seq, event);
  }

  addAll(events: Iterable<TraceEvent>): void {
    for (const ev of events) this.add(ev);
  }

  ordered(): TraceEvent[] {
    return [...this.events.values()].sort((a, b) => a.seq - b.seq);
  }

  view(): TraceView {
    return buildView(this.ordered());
  }
}

/**
 * Groups ordered events into step cards: each card is one reasoning
 * iteration (thought, the action it chose, and the observation that came
 * back). A thought immediately followed by the final answer belongs to the
 * answer, not to a card.
 */
export function buildView(ordered: TraceEvent[]): TraceView {
  const cards: StepCard[] = [];
  let current: StepCard | null = null;
  let closingThought: string | undefined;
  let finalAnswer: string | undefined;
  let error: string | undefined;
  let terminal = false;

  const flush = () => {
    if (current) cards.push(current);
    current = null;
  };

  for (const ev of ordered) {
    if (terminal) break;
    switch (ev.kind) {
      case "thought":
        flush();
        current = { thought: ev.payload };
        break;
      case "action":
        if (!current || current.action !== undefined) {
          flush();
          current = {};
        }
        current.action = ev.action ?? "";
        current.actionInput = ev.payload;
        break;
      case "observation":
        if (!current) current = {};
        current.observation = ev.payload;
        flush();
        break;
      case "final":
        // A dangling thought card with no tool call announces the answer.
        if (current && current.action === undefined && current.observation === undefined) {
          closingThought = current.thought;
          current = null;
        }
        flush();
        finalAnswer = ev.payload;
        terminal = true;
        break;
      case "error":
        flush();
        error = ev.payload;
        terminal = true;
        break;
    }
  }
  flush();

  let partial = false;
  for (let i = 0; i < ordered.length; i++) {
    if (ordered[i].seq !== i) {
      partial = true;
      break;
    }
  }

  return { cards, closingThought, finalAnswer, error, terminal, partial };
}
