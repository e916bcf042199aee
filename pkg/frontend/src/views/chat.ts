import { el } from "../dom.js";

export interface ChatTurn {
  question: string;
  answer: string;
}

export interface ChatPanelState {
  turns: ChatTurn[];
  inFlight: boolean;
  error: string | null;
}

export interface ChatPanelHandlers {
  onSend: (question: string) => void;
  onRetry: (question: string) => void;
}

/** Grounded chat transcript. The input locks while a turn is in flight
 * so a double submit cannot fork the session; a failed turn leaves the
 * transcript untouched and offers a retry. */
export function renderChatPanel(state: ChatPanelState, handlers: ChatPanelHandlers): HTMLElement {
  const transcript = el(
    "ol",
    { class: "transcript" },
    ...state.turns.map((turn) =>
      el(
        "li",
        { class: "turn" },
        el("p", { class: "question" }, turn.question),
        el("p", { class: "answer" }, turn.answer),
      ),
    ),
  );

  const input = el("input", {
    class: "chat-input",
    placeholder: "Ask about this report...",
    disabled: state.inFlight,
  }) as HTMLInputElement;

  const send = () => {
    const question = input.value.trim();
    if (question && !state.inFlight) handlers.onSend(question);
  };

  const errorRow = state.error
    ? el(
        "div",
        { class: "chat-error" },
        el("span", {}, state.error),
        el("button", { class: "retry", click: () => handlers.onRetry(input.value.trim()) }, "Retry"),
      )
    : null;

  return el(
    "section",
    { class: "chat-panel" },
    el("h3", {}, "Ask the report"),
    transcript,
    errorRow,
    el(
      "form",
      {
        class: "chat-form",
        submit: (event) => {
          event.preventDefault();
          send();
        },
      },
      input,
      el("button", { type: "submit", disabled: state.inFlight }, state.inFlight ? "..." : "Send"),
    ),
  );
}
