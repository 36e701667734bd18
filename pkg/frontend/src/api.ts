import { SseParser } from "./sse.js";
import type { TraceEvent, TraceEventKind } from "./types.js";

export class AgentBusyError extends Error {
  constructor() {
    super("agent busy");
  }
}

export interface ChatHandle {
  traceId: string;
}

export async function postChat(
  baseUrl: string,
  question: string,
  backend: string,
  sessionId?: string,
): Promise<ChatHandle> {
  const response = await fetch(`${baseUrl}/v1/chat`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({
      question,
      backend,
      ...(sessionId ? { session_id: sessionId } : {}),
    }),
  });
  if (response.status === 429) throw new AgentBusyError();
  if (!response.ok) throw new Error(`HTTP ${response.status}`);
  const body = (await response.json()) as { trace_id: string };
  return { traceId: body.trace_id };
}

const TERMINAL: TraceEventKind[] = ["final", "error"];

/**
 * Follow a trace stream; the server replays from seq 0 on every connect,
 * so reconnecting is safe (the store deduplicates by seq).
 */
export async function streamTrace(
  baseUrl: string,
  traceId: string,
  onEvent: (event: TraceEvent) => void,
  signal?: AbortSignal,
): Promise<void> {
  const response = await fetch(`${baseUrl}/v1/traces/${traceId}/events`, { signal });
  if (!response.ok) throw new Error(`HTTP ${response.status}`);
  if (!response.body) throw new Error("no response body");
  const reader = response.body.getReader();
  const decoder = new TextDecoder("utf-8");
  const parser = new SseParser();
  for (;;) {
    const { value, done } = await reader.read();
    if (done) return;
    for (const frame of parser.feed(decoder.decode(value, { stream: true }))) {
      const data = JSON.parse(frame.data) as { seq: number; payload: string; action?: string };
      const event: TraceEvent = {
        seq: data.seq,
        kind: frame.event as TraceEventKind,
        payload: data.payload,
        action: data.action,
      };
      onEvent(event);
      if (TERMINAL.includes(event.kind)) return;
    }
  }
}

export interface ToolInfo {
  tool_id: string;
  action_name: string;
  description: string;
}

export async function getTools(baseUrl: string): Promise<ToolInfo[]> {
  const response = await fetch(`${baseUrl}/v1/tools`);
  if (!response.ok) throw new Error(`HTTP ${response.status}`);
  const body = (await response.json()) as { tools: ToolInfo[] };
  return body.tools;
}

export async function ping(baseUrl: string): Promise<boolean> {
  try {
    const response = await fetch(`${baseUrl}/healthz`);
    return response.ok;
  } catch {
    return false;
  }
}
