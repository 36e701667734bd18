/** Incremental parser for text/event-stream bodies. */

export interface SseFrame {
  event: string;
  data: string;
}

export class SseParser {
  private buffer = "";

  /** Feed a decoded chunk; returns every frame completed by it. */
  feed(chunk: string): SseFrame[] {
    this.buffer += chunk;
    const pieces = this.buffer.split(/\r?\n\r?\n/);
    this.buffer = pieces.pop() ?? "";
    const frames: SseFrame[] = [];
    for (const piece of pieces) {
      const frame = parseFrame(piece);
      if (frame) frames.push(frame);
    }
    return frames;
  }
}

export function parseFrame(text: string): SseFrame | null {
  let event = "message";
  const dataLines: string[] = [];
  for (const rawLine of text.split(/\r?\n/)) {
    const line = rawLine.replace(/\r$/, "");
    if (line.startsWith("event:")) {
      event = line.slice("event:".length).trim();
    } else if (line.startsWith("data:")) {
      dataLines.push(line.slice("data:".length).trim());
    }
  }
  if (dataLines.length === 0) return null;
  return { event, data: dataLines.join("\n") };
}
