export type TraceEventKind = "thought" | "action" | "observation" | "final" | "error";

export interface TraceEvent {
  seq: number;
  kind: TraceEventKind;
  payload: string;
  action?: string;
}

/** One reasoning iteration: a thought plus the tool call it led to. */
export interface StepCard {
  thought?: string;
  action?: string;
  actionInput?: string;
  observation?: string;
}

export interface TraceView {
  cards: StepCard[];
  /** Thought emitted right before the final answer, shown with the answer. */
  closingThought?: string;
  finalAnswer?: string;
  error?: string;
  terminal: boolean;
  /** True when seq numbers have holes (events lost on the wire). */
  partial: boolean;
}

export interface UiMessage {
  role: "user" | "agent";
  text: string;
  trace?: TraceView;
  artifacts: string[];
}

export interface UiSettings {
  serviceBaseUrl: string;
  backendId: string;
  memoryEnabled: boolean;
  theme: "dark" | "light";
}
