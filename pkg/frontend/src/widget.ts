/** Number-line range widget for one parameter.
 *
 * Valid intervals render as shaded segments; each finite endpoint gets
 * a glyph, filled when the endpoint is attainable (closed) and hollow
 * when it is a limit (open). An unbounded interval runs off the right
 * edge into an arrowhead at the soft display cap.
 */
import {
  formatRange,
  numberLineScale,
  positionOnLine,
  rangeContains,
  snapToRange,
} from "./intervals.js";
import type { IntervalReport } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 360;
const HEIGHT = 44;
const AXIS_Y = 24;
const GLYPH_R = 5;

export interface WidgetCallbacks {
  /** Called with a value the client-side guard already accepted. */
  onSubmit: (parameter: string, value: number) => void;
}

export class RangeWidget {
  readonly root: HTMLElement;
  readonly parameter: string;
  private intervals: IntervalReport[] = [];
  private readonly svg: SVGSVGElement;
  private readonly input: HTMLInputElement;
  private readonly button: HTMLButtonElement;
  private readonly caption: HTMLElement;
  private readonly message: HTMLElement;

  constructor(
    doc: Document,
    parameter: string,
    private readonly systemScale: number,
    private readonly callbacks: WidgetCallbacks,
  ) {
    this.parameter = parameter;
    this.root = doc.createElement("section");
    this.root.className = "range-widget";
    this.root.dataset.parameter = parameter;

    const title = doc.createElement("header");
    title.textContent = parameter;
    this.caption = doc.createElement("span");
    this.caption.className = "range-caption";
    title.appendChild(this.caption);
    this.root.appendChild(title);

    this.svg = doc.createElementNS(SVG_NS, "svg") as SVGSVGElement;
    this.svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
    this.svg.setAttribute("class", "number-line");
    this.root.appendChild(this.svg);

    const form = doc.createElement("div");
    form.className = "assign-row";
    this.input = doc.createElement("input");
    this.input.type = "number";
    this.input.step = "any";
    this.button = doc.createElement("button");
    this.button.textContent = "assign";
    this.button.addEventListener("click", () => this.submit());
    this.message = doc.createElement("p");
    this.message.className = "widget-message";
    form.append(this.input, this.button);
    this.root.append(form, this.message);
  }

  /** Latest server payload for this parameter. */
  update(intervals: IntervalReport[]): void {
    this.intervals = intervals;
    this.caption.textContent = ` ${formatRange(intervals)}`;
    this.root.classList.remove("stale", "locked");
    this.input.disabled = false;
    this.button.disabled = false;
    this.message.textContent = "";
    this.draw();
  }

  /** Recompute in progress: keep the picture, flag it as aging. */
  markStale(): void {
    this.root.classList.add("stale");
    this.input.disabled = true;
    this.button.disabled = true;
  }

  /** Parameter committed: freeze the widget at the assigned value. */
  lock(value: number): void {
    this.root.classList.add("locked");
    this.input.value = String(value);
    this.input.disabled = true;
    this.button.disabled = true;
    this.message.textContent = `assigned ${value}`;
  }

  /** Render a rejection next to the control; used for server 4xx too. */
  showError(text: string): void {
    this.message.textContent = text;
    this.root.classList.add("rejected");
  }

  private submit(): void {
    const raw = Number(this.input.value);
    this.root.classList.remove("rejected");
    if (!Number.isFinite(raw)) {
      this.showError("enter a number");
      return;
    }
    if (!rangeContains(this.intervals, raw)) {
      const snapped = snapToRange(this.intervals, raw);
      if (Number.isFinite(snapped)) {
        this.input.value = String(snapped);
        this.showError(
          `${raw} is outside ${formatRange(this.intervals)}; snapped to ${this.input.value}`,
        );
      } else {
        this.showError(`no valid values for ${this.parameter}`);
      }
      return;
    }
    this.callbacks.onSubmit(this.parameter, raw);
  }

  private draw(): void {
    const doc = this.svg.ownerDocument;
    while (this.svg.firstChild) this.svg.removeChild(this.svg.firstChild);
    const scale = numberLineScale(this.intervals, this.systemScale);
    const pad = 12;
    const x = (v: number) => pad + positionOnLine(v, scale) * (WIDTH - 2 * pad);

    const axis = doc.createElementNS(SVG_NS, "line");
    axis.setAttribute("x1", String(pad));
    axis.setAttribute("x2", String(WIDTH - pad));
    axis.setAttribute("y1", String(AXIS_Y));
    axis.setAttribute("y2", String(AXIS_Y));
    axis.setAttribute("class", "axis");
    this.svg.appendChild(axis);

    for (const iv of this.intervals) {
      const x1 = x(iv.lo);
      const unbounded = iv.hi === null;
      const x2 = unbounded ? WIDTH - pad : x(iv.hi as number);
      const band = doc.createElementNS(SVG_NS, "line");
      band.setAttribute("x1", String(x1));
      band.setAttribute("x2", String(x2));
      band.setAttribute("y1", String(AXIS_Y));
      band.setAttribute("y2", String(AXIS_Y));
      band.setAttribute("class", "valid-band");
      this.svg.appendChild(band);

      this.svg.appendChild(this.endpointGlyph(doc, x1, iv.loClosed));
      if (unbounded) {
        this.svg.appendChild(this.arrowhead(doc, x2));
      } else if (x2 - x1 > GLYPH_R / 2 || !iv.hiClosed) {
        this.svg.appendChild(this.endpointGlyph(doc, x2, iv.hiClosed));
      }
      const lab = doc.createElementNS(SVG_NS, "text");
      lab.setAttribute("x", String(x1));
      lab.setAttribute("y", String(AXIS_Y + 16));
      lab.setAttribute("class", "tick-label");
      lab.textContent = String(Math.round(iv.lo * 100) / 100);
      this.svg.appendChild(lab);
    }
  }

  private endpointGlyph(doc: Document, cx: number, closed: boolean): SVGElement {
    const dot = doc.createElementNS(SVG_NS, "circle");
    dot.setAttribute("cx", String(cx));
    dot.setAttribute("cy", String(AXIS_Y));
    dot.setAttribute("r", String(GLYPH_R));
    dot.setAttribute("class", closed ? "endpoint closed" : "endpoint open");
    // hollow glyph for a limit, filled for an attainable endpoint
    dot.setAttribute("fill", closed ? "currentColor" : "none");
    dot.setAttribute("stroke", "currentColor");
    return dot;
  }

  private arrowhead(doc: Document, tip: number): SVGElement {
    const head = doc.createElementNS(SVG_NS, "path");
    const y = AXIS_Y;
    head.setAttribute(
      "d",
      `M ${tip - 9} ${y - 6} L ${tip} ${y} L ${tip - 9} ${y + 6}`,
    );
    head.setAttribute("class", "arrowhead");
    head.setAttribute("fill", "none");
    head.setAttribute("stroke", "currentColor");
    return head;
  }
}
