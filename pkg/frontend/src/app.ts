import { ApiClient } from "./api";
import { JudgeSession } from "./session";
import { STRINGS } from "./strings";

const root = document.getElementById("app") as HTMLElement;

function el(tag: string, className = "", text = ""): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function renderJudgePrompt(): void {
  root.replaceChildren();
  const form = el("form", "judge-form");
  const label = el("label", "", STRINGS.judgePrompt);
  const input = document.createElement("input");
  input.name = "judge";
  input.required = true;
  input.pattern = "[A-Za-z0-9._-]{1,64}";
  label.appendChild(input);
  const button = el("button", "primary", STRINGS.judgeStart) as HTMLButtonElement;
  button.type = "submit";
  form.append(label, button);
  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const params = new URLSearchParams(window.location.search);
    params.set("judge", input.value.trim());
    window.location.search = params.toString();
  });
  root.appendChild(form);
}

function renderMessage(text: string, retry?: () => void): void {
  root.replaceChildren();
  root.appendChild(el("p", "message", text));
  if (retry) {
    const button = el("button", "primary", STRINGS.retry) as HTMLButtonElement;
    button.addEventListener("click", retry);
    root.appendChild(button);
  }
}

function renderTask(session: JudgeSession): void {
  const task = session.current;
  if (!task) return;
  root.replaceChildren();

  const header = el("header");
  header.appendChild(el("h1", "", STRINGS.appTitle));
  header.appendChild(
    el("p", "progress", STRINGS.progress(session.submittedCount + 1, session.total)),
  );
  root.appendChild(header);

  root.appendChild(el("p", "instructions", STRINGS.instructions));
  const sentence = el("section", "sentence");
  sentence.appendChild(el("h2", "", STRINGS.sentenceLabel));
  sentence.appendChild(el("p", "context", task.context));
  root.appendChild(sentence);

  const list = el("ol", "candidates");
  session.ordering.forEach((candidate, index) => {
    const item = el("li", "candidate");
    item.tabIndex = 0;
    item.draggable = true;
    item.dataset.index = String(index);
    item.appendChild(el("span", "word", candidate));

    const controls = el("span", "controls");
    const up = el("button", "move", "↑") as HTMLButtonElement;
    up.title = STRINGS.moveUp;
    up.addEventListener("click", () => {
      session.reorder(index, index - 1);
      renderTask(session);
    });
    const down = el("button", "move", "↓") as HTMLButtonElement;
    down.title = STRINGS.moveDown;
    down.addEventListener("click", () => {
      session.reorder(index, index + 1);
      renderTask(session);
    });
    controls.append(up, down);
    item.appendChild(controls);

    item.addEventListener("keydown", (ev) => {
      if (ev.key !== "ArrowUp" && ev.key !== "ArrowDown") return;
      ev.preventDefault();
      const to = ev.key === "ArrowUp" ? index - 1 : index + 1;
      session.reorder(index, to);
      renderTask(session);
      const moved = root.querySelector<HTMLElement>(`li[data-index="${to}"]`);
      moved?.focus();
    });

    item.addEventListener("dragstart", (ev) => {
      ev.dataTransfer?.setData("text/plain", String(index));
    });
    item.addEventListener("dragover", (ev) => ev.preventDefault());
    item.addEventListener("drop", (ev) => {
      ev.preventDefault();
      const from = Number(ev.dataTransfer?.getData("text/plain"));
      if (Number.isInteger(from)) {
        session.reorder(from, index);
        renderTask(session);
      }
    });

    list.appendChild(item);
  });
  root.appendChild(list);
  root.appendChild(el("p", "hint", STRINGS.keyboardHint));

  if (session.lastError) {
    root.appendChild(el("p", "error", `${STRINGS.submitFailed} ${session.lastError}`));
  }

  const submit = el(
    "button",
    "primary submit",
    session.phase === "submitting" ? STRINGS.sending : STRINGS.submit,
  ) as HTMLButtonElement;
  submit.disabled = !session.canSubmit;
  submit.addEventListener("click", async () => {
    submit.disabled = true;
    await session.submit();
    render(session);
  });
  root.appendChild(submit);
  if (!session.touched) {
    root.appendChild(el("p", "hint", STRINGS.submitHint));
  }
}

function render(session: JudgeSession): void {
  switch (session.phase) {
    case "loading":
      renderMessage(STRINGS.loading);
      break;
    case "load-error":
      renderMessage(`${STRINGS.loadFailed} (${session.lastError})`, () => {
        void session.load().then(() => render(session));
      });
      break;
    case "done":
      renderMessage(session.total === 0 ? STRINGS.emptyState : STRINGS.allDone);
      break;
    default:
      renderTask(session);
  }
}

async function start(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const judgeId = (params.get("judge") ?? "").trim();
  if (!judgeId) {
    renderJudgePrompt();
    return;
  }
  const session = new JudgeSession(new ApiClient(""), judgeId, params.get("shuffle") === "1");
  render(session);
  await session.load();
  render(session);
}

void start();
