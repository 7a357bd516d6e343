/** Single-page assembly: selection, live range widgets, assignment
 * history, undo/finalize, and the sketch canvas.
 *
 * One mutation is in flight at a time; while the server recomputes,
 * widgets are flagged stale and a status banner shows the pending
 * computation. Every server 4xx lands in front of the user verbatim.
 */
import { ApiClient, ApiError } from "./api.js";
import { RangeWidget } from "./widget.js";
import { renderSketch } from "./sketch.js";
import type { RangesPayload, SystemPayload } from "./types.js";

const POLL_MS = 350;

export class App {
  private readonly client: ApiClient;
  private readonly doc: Document;
  private system: SystemPayload | null = null;
  private widgets = new Map<string, RangeWidget>();
  private history: Array<[string, number]> = [];
  private busy = false;
  private pollTimer: ReturnType<typeof setTimeout> | null = null;

  private banner!: HTMLElement;
  private selectBox!: HTMLElement;
  private widgetBox!: HTMLElement;
  private historyBox!: HTMLElement;
  private canvas!: HTMLCanvasElement;

  constructor(
    private readonly mount: HTMLElement,
    client?: ApiClient,
    private readonly pollMs: number = POLL_MS,
  ) {
    this.doc = mount.ownerDocument;
    this.client = client ?? new ApiClient();
  }

  async start(): Promise<void> {
    this.buildSkeleton();
    try {
      this.system = await this.client.system();
    } catch (err) {
      this.showError(err);
      return;
    }
    this.renderSelection();
    renderSketch(this.canvas, this.system, this.system.solution);
    if (this.system.selected.length) {
      this.buildWidgets(this.system.selected);
      this.pollUntilReady();
    }
  }

  dispose(): void {
    if (this.pollTimer !== null) clearTimeout(this.pollTimer);
  }

  private buildSkeleton(): void {
    const d = this.doc;
    this.mount.textContent = "";
    this.banner = d.createElement("div");
    this.banner.className = "banner";
    this.selectBox = d.createElement("div");
    this.selectBox.className = "selection";
    this.widgetBox = d.createElement("div");
    this.widgetBox.className = "widgets";
    this.historyBox = d.createElement("div");
    this.historyBox.className = "history";
    this.canvas = d.createElement("canvas");
    this.canvas.width = 520;
    this.canvas.height = 420;
    const controls = d.createElement("div");
    controls.className = "controls";
    const undo = d.createElement("button");
    undo.textContent = "undo";
    undo.className = "undo";
    undo.addEventListener("click", () => void this.undo());
    const finalize = d.createElement("button");
    finalize.textContent = "finalize";
    finalize.className = "finalize";
    finalize.addEventListener("click", () => void this.finalize());
    controls.append(undo, finalize);
    this.mount.append(
      this.banner, this.selectBox, this.widgetBox, controls,
      this.historyBox, this.canvas,
    );
  }

  private renderSelection(): void {
    if (!this.system) return;
    const d = this.doc;
    this.selectBox.textContent = "";
    const boxes: HTMLInputElement[] = [];
    for (const p of this.system.parameters) {
      const label = d.createElement("label");
      const box = d.createElement("input");
      box.type = "checkbox";
      box.value = p.name;
      box.checked = this.system.selected.includes(p.name);
      boxes.push(box);
      label.append(box, d.createTextNode(` ${p.name} (${p.kind})`));
      this.selectBox.appendChild(label);
    }
    const go = d.createElement("button");
    go.textContent = "select for editing";
    go.className = "select-go";
    go.addEventListener("click", () => {
      const names = boxes.filter((b) => b.checked).map((b) => b.value);
      void this.select(names);
    });
    this.selectBox.appendChild(go);
  }

  private async select(names: string[]): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    try {
      await this.client.select(names);
      this.history = [];
      this.renderHistory();
      this.buildWidgets(names);
      this.setBanner("computing ranges…", true);
      this.pollUntilReady();
    } catch (err) {
      this.showError(err);
    } finally {
      this.busy = false;
    }
  }

  private buildWidgets(names: string[]): void {
    this.widgetBox.textContent = "";
    this.widgets.clear();
    const scale = this.systemScale();
    for (const name of names) {
      const widget = new RangeWidget(this.doc, name, scale, {
        onSubmit: (parameter, value) => void this.assign(parameter, value),
      });
      widget.markStale();
      this.widgets.set(name, widget);
      this.widgetBox.appendChild(widget.root);
    }
  }

  /** Mirrors the solver's search box: 10x the largest declared value. */
  private systemScale(): number {
    let largest = 10;
    for (const p of this.system?.parameters ?? []) {
      if (typeof p.value === "number") largest = Math.max(largest, Math.abs(p.value));
    }
    return Math.max(100, 10 * largest) / 10;
  }

  private async assign(parameter: string, value: number): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    try {
      await this.client.assign(parameter, value);
      this.history.push([parameter, value]);
      this.renderHistory();
      this.widgets.get(parameter)?.lock(value);
      for (const [name, w] of this.widgets) {
        if (name !== parameter && !this.isAssigned(name)) w.markStale();
      }
      this.setBanner("recomputing ranges…", true);
      this.pollUntilReady();
    } catch (err) {
      if (err instanceof ApiError) {
        this.widgets.get(parameter)?.showError(err.detail);
        this.setBanner(err.detail, false);
      } else {
        this.showError(err);
      }
    } finally {
      this.busy = false;
    }
  }

  private async undo(): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    try {
      await this.client.undo();
      this.history.pop();
      this.renderHistory();
      this.setBanner("recomputing ranges…", true);
      this.pollUntilReady();
    } catch (err) {
      this.showError(err);
    } finally {
      this.busy = false;
    }
  }

  private async finalize(): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    try {
      const payload = await this.client.finalize();
      if (this.system) {
        renderSketch(this.canvas, this.system, payload.solution);
      }
      const residual = payload.residual;
      this.setBanner(
        residual === null ? "solved" : `solved, residual ${residual.toExponential(2)}`,
        false,
      );
    } catch (err) {
      this.showError(err);
    } finally {
      this.busy = false;
    }
  }

  private pollUntilReady(): void {
    if (this.pollTimer !== null) clearTimeout(this.pollTimer);
    const tick = async () => {
      this.pollTimer = null;
      let status;
      try {
        status = await this.client.rangesStatus();
      } catch (err) {
        this.showError(err);
        return;
      }
      if (status.status === "computing" || status.status === "stale") {
        this.setBanner("computing ranges…", true);
        this.pollTimer = setTimeout(() => void tick(), this.pollMs);
        return;
      }
      if (status.status === "error") {
        this.setBanner(status.detail, false);
        return;
      }
      if (status.status === "ready") await this.refreshRanges();
    };
    void tick();
  }

  private async refreshRanges(): Promise<void> {
    let payload;
    try {
      payload = await this.client.ranges();
    } catch (err) {
      this.showError(err);
      return;
    }
    if (!("ranges" in payload)) {
      this.pollUntilReady();
      return;
    }
    const ranges = payload as RangesPayload;
    for (const [name, report] of Object.entries(ranges.ranges)) {
      this.widgets.get(name)?.update(report.intervals);
    }
    for (const [name, value] of Object.entries(ranges.assigned)) {
      this.widgets.get(name)?.lock(value);
    }
    this.setBanner("ranges up to date", false);
  }

  private isAssigned(name: string): boolean {
    return this.history.some(([n]) => n === name);
  }

  private renderHistory(): void {
    this.historyBox.textContent = "";
    const list = this.doc.createElement("ol");
    for (const [name, value] of this.history) {
      const item = this.doc.createElement("li");
      item.textContent = `${name} := ${value}`;
      list.appendChild(item);
    }
    this.historyBox.appendChild(list);
  }

  private setBanner(text: string, pending: boolean): void {
    this.banner.textContent = text;
    this.banner.classList.toggle("pending", pending);
  }

  private showError(err: unknown): void {
    const text = err instanceof ApiError
      ? `${err.code}: ${err.detail}`
      : String(err);
    this.setBanner(text, false);
  }
}

export function mountApp(root: HTMLElement): App {
  const base = (globalThis as Record<string, unknown>)["PRANGE_BASE"];
  const app = new App(root, new ApiClient(typeof base === "string" ? base : ""));
  void app.start();
  return app;
}
