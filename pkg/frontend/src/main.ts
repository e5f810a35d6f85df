import { Api, ApiError } from "./api.js";
import { ChatView } from "./chat.js";
import { TurnEditor } from "./editor.js";
import { LogListView } from "./logs.js";
import type { LogTurn, SchemaSummary } from "./types.js";

const api = new Api("");
const chat = new ChatView(api);
const logList = new LogListView(api);
let schema: SchemaSummary | null = null;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  node.append(...children);
  return node;
}

function $(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

// -- chat -------------------------------------------------------------------

function renderChat(): void {
  const box = $("transcript");
  box.replaceChildren();
  for (const row of chat.transcript) {
    box.append(
      el("div", { class: "turn user" }, el("b", {}, "user "), row.userText),
      el(
        "div",
        { class: "turn agent" },
        el("b", {}, "agent "),
        row.agentText,
        el(
          "div",
          { class: "belief" },
          `belief: ${row.belief.map(([s, v]) => `${s}=${v}`).join(", ") || "(empty)"}` +
            ` | db: ${row.dbBucket}` +
            (row.flags.length ? ` | flags: ${row.flags.join(",")}` : ""),
        ),
      ),
    );
  }
  box.scrollTop = box.scrollHeight;
  const banner = $("chat-error");
  banner.textContent = chat.error ?? "";
  banner.style.display = chat.error ? "block" : "none";
  ($("chat-input") as HTMLInputElement).disabled = !chat.inputEnabled;
  ($("chat-send") as HTMLButtonElement).disabled = !chat.inputEnabled;
}

async function sendFromInput(): Promise<void> {
  const input = $("chat-input") as HTMLInputElement;
  const text = input.value.trim();
  if (!text) return;
  await chat.send(text);
  if (!chat.error) input.value = "";
  renderChat();
}

// -- logs + editor ----------------------------------------------------------

function renderLogs(): void {
  const list = $("log-list");
  list.replaceChildren();
  for (const log of logList.logs) {
    const item = el(
      "div",
      { class: "log-item" },
      el("b", {}, log.id),
      ` ${log.domain} · ${log.turns} turns · ${log.started_at.slice(0, 19)}`,
      log.flags.length ? el("span", { class: "flags" }, ` [${log.flags.join(",")}]`) : "",
    );
    item.addEventListener("click", () => void openLog(log.id));
    list.append(item);
  }
  $("log-page").textContent = `page ${logList.page}/${logList.pages} (${logList.total})`;
}

async function openLog(sessionId: string): Promise<void> {
  const detail = await api.getLog(sessionId);
  const box = $("log-detail");
  box.replaceChildren(el("h3", {}, `session ${detail.id}`));
  detail.turns.forEach((turn: LogTurn) => {
    const beliefText = Object.entries(turn.prediction.belief)
      .map(([s, v]) => `${s}=${v}`)
      .join(", ");
    const row = el(
      "div",
      { class: "log-turn" },
      el("div", {}, el("b", {}, `#${turn.index} user `), turn.user_utterance),
      el("div", {}, el("b", {}, "agent "), turn.agent_utterance),
      el("div", { class: "belief" }, `belief: ${beliefText || "(empty)"}`),
    );
    const editButton = el("button", {}, "correct");
    editButton.addEventListener("click", () => openEditor(sessionId, turn));
    row.append(editButton);
    box.append(row);
  });
}

function openEditor(sessionId: string, turn: LogTurn): void {
  if (!schema) return;
  const editor = new TurnEditor(
    sessionId,
    turn.index,
    turn.prediction.belief,
    turn.prediction.response_delex,
    schema,
  );
  const box = $("editor");
  const status = el("div", { class: "editor-status" });

  const chipsBox = el("div", { class: "chips" });
  const renderChips = () => {
    chipsBox.replaceChildren();
    for (const chip of editor.chips) {
      const remove = el("button", { class: "chip-x" }, "x");
      remove.addEventListener("click", () => {
        editor.removeChip(chip.slot);
        renderChips();
      });
      chipsBox.append(el("span", { class: "chip" }, `${chip.slot}=${chip.value}`, remove));
    }
  };
  renderChips();

  const slotSelect = el("select", {});
  for (const slot of editor.informableSlots) {
    slotSelect.append(el("option", { value: slot }, slot));
  }
  const valueInput = el("input", { placeholder: "value" }) as HTMLInputElement;
  const addButton = el("button", {}, "set chip");
  addButton.addEventListener("click", () => {
    try {
      editor.setChip((slotSelect as HTMLSelectElement).value, valueInput.value);
      valueInput.value = "";
      renderChips();
      status.textContent = "";
    } catch (err) {
      status.textContent = String(err);
    }
  });

  const responseInput = el("textarea", {}, editor.responseText) as HTMLTextAreaElement;
  responseInput.addEventListener("input", () => editor.setResponse(responseInput.value));

  const submit = el("button", {}, "submit correction");
  submit.addEventListener("click", () => {
    void (async () => {
      const problem = editor.validate();
      if (problem) {
        status.textContent = problem;
        return;
      }
      try {
        const reply = await api.submitCorrection(editor.buildPayload());
        status.textContent = reply.deduplicated
          ? "already submitted (deduplicated)"
          : "correction accepted";
      } catch (err) {
        status.textContent = err instanceof ApiError ? err.message : String(err);
      }
    })();
  });

  box.replaceChildren(
    el("h3", {}, `correct turn #${turn.index}`),
    chipsBox,
    el("div", {}, slotSelect, valueInput, addButton),
    el("div", {}, el("label", {}, "response (delexicalized)"), responseInput),
    submit,
    status,
  );
}

// -- top-level wiring -------------------------------------------------------

async function refreshMetrics(): Promise<void> {
  try {
    const m = await api.metrics();
    $("metrics").textContent =
      `success ${m.success_rate} · jga ${m.jga} · avg turns ${m.avg_turns_successful}`;
  } catch {
    $("metrics").textContent = "metrics unavailable";
  }
}

async function init(): Promise<void> {
  schema = await api.schema();
  $("domain").textContent = schema.domain;

  $("chat-send").addEventListener("click", () => void sendFromInput());
  ($("chat-input") as HTMLInputElement).addEventListener("keydown", (e) => {
    if (e.key === "Enter") void sendFromInput();
  });
  $("chat-new").addEventListener("click", () => {
    void chat.start().then(renderChat);
  });
  $("chat-end").addEventListener("click", () => {
    void chat.end().then(() => {
      renderChat();
      void logList.refresh().then(renderLogs);
    });
  });
  $("flagged-only").addEventListener("change", (e) => {
    void logList
      .setFlaggedOnly((e.target as HTMLInputElement).checked)
      .then(renderLogs);
  });
  $("log-prev").addEventListener("click", () => void logList.prev().then(renderLogs));
  $("log-next").addEventListener("click", () => void logList.next().then(renderLogs));
  $("retrain").addEventListener("click", () => {
    void api
      .retrain()
      .then((r) => {
        $("retrain-status").textContent = `retrained (${String(r["mode"])})`;
        void refreshMetrics();
      })
      .catch((err) => {
        $("retrain-status").textContent =
          err instanceof ApiError ? err.message : String(err);
      });
  });

  await chat.start();
  renderChat();
  await logList.refresh();
  renderLogs();
  logList.startPolling();
  setInterval(renderLogs, logList.pollMs);
  void refreshMetrics();
}

void init();
