import { el } from "./dom.js";
import { eur } from "./fmt.js";
import type { LedgerRow } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 560;
const HEIGHT = 220;
const PAD = { left: 54, right: 12, top: 14, bottom: 26 };

const PALETTE = ["#2563eb", "#dc2626", "#059669", "#d97706", "#7c3aed", "#0891b2"];

export type Series = { label: string; values: (number | null)[] };

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K, attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  return node;
}

function finite(values: (number | null)[]): number[] {
  return values.filter((v): v is number => v !== null && Number.isFinite(v));
}

function range(seriesList: Series[]): { lo: number; hi: number } {
  const all = seriesList.flatMap((s) => finite(s.values));
  if (all.length === 0) return { lo: 0, hi: 1 };
  let lo = Math.min(...all);
  let hi = Math.max(...all);
  if (lo === hi) {
    lo -= 1;
    hi += 1;
  }
  const margin = (hi - lo) * 0.05;
  return { lo: lo - margin, hi: hi + margin };
}

/**
 * Multi-series line chart. Every series keeps its raw service numbers in a
 * data-values JSON attribute; the hover tooltip reads them back from there,
 * so what the DOM carries is exactly what the service sent.
 */
export function lineChart(
  title: string,
  seriesList: Series[],
  opts: { unit?: string; xLabels?: string[] } = {},
): HTMLElement {
  const n = Math.max(...seriesList.map((s) => s.values.length), 0);
  const { lo, hi } = range(seriesList);
  const plotW = WIDTH - PAD.left - PAD.right;
  const plotH = HEIGHT - PAD.top - PAD.bottom;
  const x = (i: number) => PAD.left + (n > 1 ? (i / (n - 1)) * plotW : plotW / 2);
  const y = (v: number) => PAD.top + (1 - (v - lo) / (hi - lo)) * plotH;

  const svg = svgEl("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    class: "chart-svg",
    role: "img",
    "aria-label": title,
  });

  for (let k = 0; k <= 4; k++) {
    const v = lo + ((hi - lo) * k) / 4;
    const gy = y(v);
    svg.append(
      svgEl("line", {
        x1: String(PAD.left), y1: String(gy),
        x2: String(WIDTH - PAD.right), y2: String(gy),
        class: "grid-line",
      }),
    );
    const label = svgEl("text", {
      x: String(PAD.left - 6), y: String(gy + 3),
      class: "axis-label", "text-anchor": "end",
    });
    label.textContent = Math.abs(v) >= 1000 ? v.toFixed(0) : v.toPrecision(3);
    svg.append(label);
  }

  const xLabels = opts.xLabels ?? [];
  if (xLabels.length > 1) {
    const ticks = Math.min(6, xLabels.length);
    for (let k = 0; k < ticks; k++) {
      const i = Math.round((k * (xLabels.length - 1)) / (ticks - 1));
      const label = svgEl("text", {
        x: String(x(i)), y: String(HEIGHT - 8),
        class: "axis-label", "text-anchor": "middle",
      });
      label.textContent = xLabels[i];
      svg.append(label);
    }
  }

  seriesList.forEach((s, si) => {
    const color = PALETTE[si % PALETTE.length];
    let d = "";
    let pen = "M";
    s.values.forEach((v, i) => {
      if (v === null || !Number.isFinite(v)) {
        pen = "M";
        return;
      }
      d += `${pen}${x(i).toFixed(1)},${y(v).toFixed(1)}`;
      pen = "L";
    });
    const path = svgEl("path", {
      d, fill: "none", stroke: color, "stroke-width": "1.5",
      "data-label": s.label,
      "data-values": JSON.stringify(s.values),
    });
    svg.append(path);
  });

  const tooltip = el("div", { class: "chart-tooltip", hidden: "" });
  const marker = svgEl("line", {
    class: "chart-marker", y1: String(PAD.top), y2: String(HEIGHT - PAD.bottom),
    visibility: "hidden",
  });
  svg.append(marker);

  svg.addEventListener("mousemove", (ev) => {
    const rect = svg.getBoundingClientRect();
    if (rect.width === 0 || n === 0) return;
    const fx = ((ev.clientX - rect.left) / rect.width) * WIDTH;
    const i = Math.max(0, Math.min(n - 1,
      Math.round(((fx - PAD.left) / plotW) * (n - 1))));
    marker.setAttribute("x1", String(x(i)));
    marker.setAttribute("x2", String(x(i)));
    marker.setAttribute("visibility", "visible");
    const lines: string[] = [];
    if (xLabels[i] !== undefined) lines.push(xLabels[i]);
    for (const path of svg.querySelectorAll("path[data-values]")) {
      const values = JSON.parse(path.getAttribute("data-values") ?? "[]");
      const v = values[i];
      if (v !== null && v !== undefined) {
        lines.push(`${path.getAttribute("data-label")}: ${v}`);
      }
    }
    tooltip.textContent = lines.join(" · ");
    tooltip.removeAttribute("hidden");
  });
  svg.addEventListener("mouseleave", () => {
    tooltip.setAttribute("hidden", "");
    marker.setAttribute("visibility", "hidden");
  });

  const legend = el(
    "div", { class: "chart-legend" },
    ...seriesList.map((s, si) =>
      el("span", { class: "legend-item" },
        el("span", {
          class: "legend-swatch",
          style: `background:${PALETTE[si % PALETTE.length]}`,
        }),
        opts.unit ? `${s.label} (${opts.unit})` : s.label,
      ),
    ),
  );

  return el("figure", { class: "chart" },
    el("figcaption", {}, title), svg, legend, tooltip);
}

/**
 * Horizontal signed bars, one per ledger line. Raw EUR amounts ride along
 * in data-values, same contract as the line charts.
 */
export function barChart(title: string, labels: string[], values: number[]): HTMLElement {
  const height = 30 + labels.length * 26;
  const svg = svgEl("svg", {
    viewBox: `0 0 ${WIDTH} ${height}`,
    class: "chart-svg",
    role: "img",
    "aria-label": title,
    "data-values": JSON.stringify(values),
  });
  const extent = Math.max(...values.map(Math.abs), 1e-12);
  const mid = PAD.left + (WIDTH - PAD.left - PAD.right) / 2;
  const half = (WIDTH - PAD.left - PAD.right) / 2;
  svg.append(svgEl("line", {
    x1: String(mid), y1: "6", x2: String(mid), y2: String(height - 6),
    class: "grid-line",
  }));
  values.forEach((v, i) => {
    const w = (Math.abs(v) / extent) * (half - 4);
    const yTop = 10 + i * 26;
    svg.append(svgEl("rect", {
      x: String(v >= 0 ? mid : mid - w), y: String(yTop),
      width: String(Math.max(w, 0.5)), height: "16",
      class: v >= 0 ? "bar-pos" : "bar-neg",
      "data-label": labels[i],
    }));
    const text = svgEl("text", {
      x: String(PAD.left - 6), y: String(yTop + 12),
      class: "axis-label", "text-anchor": "end",
    });
    text.textContent = labels[i];
    svg.append(text);
    const amount = svgEl("text", {
      x: String(v >= 0 ? mid + w + 6 : mid - w - 6),
      y: String(yTop + 12),
      class: "axis-label",
      "text-anchor": v >= 0 ? "start" : "end",
    });
    amount.textContent = eur(v);
    svg.append(amount);
  });
  return el("figure", { class: "chart" }, el("figcaption", {}, title), svg);
}

/** Ledger rows as a table; each amount cell carries its raw EUR value. */
export function ledgerTable(rows: LedgerRow[]): HTMLElement {
  const table = el("table", { class: "ledger" },
    el("thead", {}, el("tr", {},
      el("th", {}, "Item"),
      el("th", { class: "amount" }, "Amount"),
    )),
  );
  const body = el("tbody", {});
  for (const row of rows) {
    body.append(el("tr", {},
      el("td", {}, row.label),
      el("td", { class: "amount", "data-eur": JSON.stringify(row.eur) }, eur(row.eur)),
    ));
  }
  table.append(body);
  return table;
}
