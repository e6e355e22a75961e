/** Hand-rolled SVG document builder: deterministic output, no DOM needed. */

import { Scale } from "./scales";

export const PALETTE = ["#1668a8", "#c23e28", "#3a8f3d", "#7b4ea3", "#b07c1f",
  "#2aa198"];

export interface Panel {
  x: number;
  y: number;
  width: number;
  height: number;
  xScale: Scale;
  yScale: Scale;
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1);
  return String(Math.round(v * 1e6) / 1e6);
}

export class SvgDoc {
  readonly width: number;
  readonly height: number;
  private parts: string[] = [];

  constructor(width: number, height: number) {
    this.width = width;
    this.height = height;
  }

  add(fragment: string): void {
    this.parts.push(fragment);
  }

  panelFrame(p: Panel, xLabel: string, yLabel: string, title?: string): void {
    const { x, y, width: w, height: h } = p;
    this.add(`<rect x="${x}" y="${y}" width="${w}" height="${h}" fill="none" stroke="#444" stroke-width="1"/>`);
    for (const t of p.xScale.ticks()) {
      const px = x + p.xScale.unit(t) * w;
      if (px < x - 1e-9 || px > x + w + 1e-9) continue;
      this.add(`<line x1="${px.toFixed(2)}" y1="${y}" x2="${px.toFixed(2)}" y2="${y + h}" stroke="#ddd" stroke-width="0.6"/>`);
      this.add(`<text x="${px.toFixed(2)}" y="${y + h + 14}" font-size="9" text-anchor="middle" fill="#333">${fmt(t)}</text>`);
    }
    for (const t of p.yScale.ticks()) {
      const py = y + h - p.yScale.unit(t) * h;
      if (py < y - 1e-9 || py > y + h + 1e-9) continue;
      this.add(`<line x1="${x}" y1="${py.toFixed(2)}" x2="${x + w}" y2="${py.toFixed(2)}" stroke="#ddd" stroke-width="0.6"/>`);
      this.add(`<text x="${x - 4}" y="${(py + 3).toFixed(2)}" font-size="9" text-anchor="end" fill="#333">${fmt(t)}</text>`);
    }
    this.add(`<text x="${x + w / 2}" y="${y + h + 28}" font-size="10" text-anchor="middle" fill="#000">${xLabel}</text>`);
    this.add(`<text x="${x - 38}" y="${y + h / 2}" font-size="10" text-anchor="middle" fill="#000" transform="rotate(-90 ${x - 38} ${y + h / 2})">${yLabel}</text>`);
    if (title) {
      this.add(`<text x="${x + w / 2}" y="${y - 6}" font-size="11" text-anchor="middle" fill="#000">${title}</text>`);
    }
  }

  polyline(p: Panel, xs: number[], ys: number[], color: string): void {
    const pts: string[] = [];
    for (let i = 0; i < xs.length; i++) {
      if (!Number.isFinite(xs[i]) || !Number.isFinite(ys[i])) continue;
      const px = p.x + p.xScale.unit(xs[i]) * p.width;
      const py = p.y + p.height - p.yScale.unit(ys[i]) * p.height;
      pts.push(`${px.toFixed(2)},${py.toFixed(2)}`);
    }
    this.add(`<polyline points="${pts.join(" ")}" fill="none" stroke="${color}" stroke-width="1.4"/>`);
  }

  vline(p: Panel, xv: number, color: string, dash = "4 3"): void {
    if (xv <= p.xScale.min || xv >= p.xScale.max) return;
    const px = p.x + p.xScale.unit(xv) * p.width;
    this.add(`<line x1="${px.toFixed(2)}" y1="${p.y}" x2="${px.toFixed(2)}" y2="${p.y + p.height}" stroke="${color}" stroke-width="1.2" stroke-dasharray="${dash}"/>`);
  }

  hline(p: Panel, yv: number, color: string, dash = "4 3"): void {
    if (yv <= p.yScale.min || yv >= p.yScale.max) return;
    const py = p.y + p.height - p.yScale.unit(yv) * p.height;
    this.add(`<line x1="${p.x}" y1="${py.toFixed(2)}" x2="${p.x + p.width}" y2="${py.toFixed(2)}" stroke="${color}" stroke-width="1.2" stroke-dasharray="${dash}"/>`);
  }

  shade(p: Panel, x0: number, x1: number, color: string): void {
    const a = Math.max(x0, p.xScale.min);
    const b = Math.min(x1, p.xScale.max);
    if (!(b > a)) return;
    const px0 = p.x + p.xScale.unit(a) * p.width;
    const px1 = p.x + p.xScale.unit(b) * p.width;
    this.add(`<rect x="${px0.toFixed(2)}" y="${p.y}" width="${(px1 - px0).toFixed(2)}" height="${p.height}" fill="${color}" opacity="0.15"/>`);
  }

  legend(p: Panel, labels: string[]): void {
    labels.forEach((lbl, i) => {
      const lx = p.x + p.width - 110;
      const ly = p.y + 14 + 13 * i;
      this.add(`<line x1="${lx}" y1="${ly - 3}" x2="${lx + 18}" y2="${ly - 3}" stroke="${PALETTE[i % PALETTE.length]}" stroke-width="2"/>`);
      this.add(`<text x="${lx + 22}" y="${ly}" font-size="9" fill="#000">${lbl}</text>`);
    });
  }

  arrow(p: Panel, x1: number, y1: number, color: string, label?: string): void {
    const px0 = p.x + p.xScale.unit(0) * p.width;
    const py0 = p.y + p.height - p.yScale.unit(0) * p.height;
    const px1 = p.x + p.xScale.unit(x1) * p.width;
    const py1 = p.y + p.height - p.yScale.unit(y1) * p.height;
    this.add(`<line x1="${px0.toFixed(2)}" y1="${py0.toFixed(2)}" x2="${px1.toFixed(2)}" y2="${py1.toFixed(2)}" stroke="${color}" stroke-width="1.8" marker-end="url(#ah)"/>`);
    if (label) {
      this.add(`<text x="${(px1 + 6).toFixed(2)}" y="${py1.toFixed(2)}" font-size="10" fill="${color}">${label}</text>`);
    }
  }

  render(meta: object): string {
    const head = `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">`;
    const defs = `<defs><marker id="ah" markerWidth="8" markerHeight="8" refX="6" refY="3" orient="auto"><path d="M0,0 L6,3 L0,6 z" fill="context-stroke"/></marker></defs>`;
    const metadata = `<metadata id="plotkit-meta">${JSON.stringify(meta)}</metadata>`;
    const bg = `<rect x="0" y="0" width="${this.width}" height="${this.height}" fill="#ffffff"/>`;
    return [head, defs, metadata, bg, ...this.parts, "</svg>"].join("\n") + "\n";
  }
}
