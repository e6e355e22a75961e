/** Renderers: Bode pairs, time series, root loci, mode-shape compasses.
 *
 * Every renderer returns the SVG text plus a metadata object (dimensions,
 * axis ranges, annotations) that is embedded in the SVG and written as a
 * sidecar; smoke-level goldens pin the metadata, not pixels.
 */

import * as path from "path";

import { column, readCsv, textColumn } from "./csv";
import { Annotations, FigureSpec } from "./figspec";
import { extent, linearScale, logScale } from "./scales";
import { Panel, PALETTE, SvgDoc } from "./svg";

export interface RenderResult {
  svg: string;
  meta: {
    kind: string;
    width: number;
    height: number;
    inputs: string[];
    axes: Record<string, { scale: string; min: number; max: number }>;
    annotations: Annotations;
  };
}

const W = 560;

function baseName(p: string): string {
  return path.basename(p).replace(/\.csv$/, "");
}

export function renderBode(spec: FigureSpec): RenderResult {
  const tables = spec.inputs.map((p) => readCsv(p));
  const ann = spec.annotations ?? {};
  const H = 420;
  const doc = new SvgDoc(W, H);

  const omega = column(tables[0], spec.x ?? "omega");
  const xs = logScale(...extent(omega));
  const mags = tables.map((t) => column(t, "mag"));
  const phases = tables.map((t) => column(t, "phase_deg"));
  const magLo = Math.max(1e-12, Math.min(...mags.map((m) => extent(m)[0])));
  const magHi = Math.max(...mags.map((m) => extent(m)[1]));
  const ysMag = logScale(magLo * 0.8, magHi * 1.25);
  const [phLo, phHi] = extent(phases.flat());
  const ysPh = linearScale(phLo, phHi);

  const pm: Panel = { x: 70, y: 24, width: W - 100, height: 160, xScale: xs, yScale: ysMag };
  const pp: Panel = { x: 70, y: 232, width: W - 100, height: 140, xScale: xs, yScale: ysPh };

  doc.panelFrame(pm, "", "magnitude", spec.title);
  doc.panelFrame(pp, "angular frequency (rad/s)", "phase (deg)");
  tables.forEach((t, i) => {
    doc.polyline(pm, omega, mags[i], PALETTE[i % PALETTE.length]);
    doc.polyline(pp, omega, phases[i], PALETTE[i % PALETTE.length]);
  });
  doc.hline(pm, 1.0, "#888", "2 3");
  if (ann.band) {
    for (const edge of ann.band) {
      doc.vline(pm, edge, "#c23e28");
      doc.vline(pp, edge, "#c23e28");
    }
  }
  doc.legend(pm, spec.inputs.map(baseName));

  const meta = {
    kind: "bode",
    width: W,
    height: H,
    inputs: spec.inputs.map(baseName),
    axes: {
      omega: { scale: "log", min: xs.min, max: xs.max },
      mag: { scale: "log", min: ysMag.min, max: ysMag.max },
      phase_deg: { scale: "linear", min: ysPh.min, max: ysPh.max },
    },
    annotations: ann,
  };
  return { svg: doc.render(meta), meta };
}

export function renderTimeseries(spec: FigureSpec): RenderResult {
  const tables = spec.inputs.map((p) => readCsv(p));
  const ann = spec.annotations ?? {};
  const t0 = column(tables[0], spec.x ?? "t");
  const yNames = spec.y && spec.y.length > 0
    ? spec.y
    : tables[0].columns.filter((c) => c !== (spec.x ?? "t"));
  const H = 120 + 140 * yNames.length;
  const doc = new SvgDoc(W, H);

  const xs = linearScale(...extent(t0), 0.0);
  const axes: Record<string, { scale: string; min: number; max: number }> = {
    t: { scale: "linear", min: xs.min, max: xs.max },
  };
  yNames.forEach((name, row) => {
    const series = tables.map((t) => column(t, name));
    const [lo, hi] = extent(series.flat());
    let ylo = lo;
    let yhi = hi;
    if (ann.saturation_mw !== undefined && /u|mw/i.test(name)) {
      ylo = Math.min(ylo, -ann.saturation_mw * 1.1);
      yhi = Math.max(yhi, ann.saturation_mw * 1.1);
    }
    const ys = linearScale(ylo, yhi);
    const panel: Panel = { x: 70, y: 30 + row * 140, width: W - 100,
                           height: 110, xScale: xs, yScale: ys };
    doc.panelFrame(panel, row === yNames.length - 1 ? "time (s)" : "", name,
                   row === 0 ? spec.title : undefined);
    if (ann.disturbance_window) {
      doc.shade(panel, ann.disturbance_window[0], ann.disturbance_window[1],
                "#c23e28");
    }
    series.forEach((s, i) => doc.polyline(panel, column(tables[i], spec.x ?? "t"),
                                          s, PALETTE[i % PALETTE.length]));
    if (ann.saturation_mw !== undefined && /u|mw/i.test(name)) {
      doc.hline(panel, ann.saturation_mw, "#888");
      doc.hline(panel, -ann.saturation_mw, "#888");
    }
    axes[name] = { scale: "linear", min: ys.min, max: ys.max };
  });
  if (tables.length > 1) {
    doc.legend({ x: 70, y: 30, width: W - 100, height: 110, xScale: xs,
                 yScale: linearScale(0, 1) }, spec.inputs.map(baseName));
  }

  const meta = { kind: "timeseries", width: W, height: H,
                 inputs: spec.inputs.map(baseName), axes, annotations: ann };
  return { svg: doc.render(meta), meta };
}

export function renderRootLocus(spec: FigureSpec): RenderResult {
  const table = readCsv(spec.inputs[0]);
  const ann = spec.annotations ?? {};
  const re = column(table, "re");
  const im = column(table, "im");
  const gain = column(table, "gain");
  const H = 420;
  const doc = new SvgDoc(W, H);

  const [reLo, reHi] = extent(re);
  const [imLo, imHi] = extent(im);
  const xs = linearScale(Math.min(reLo, -0.1), Math.max(reHi, 0.1));
  const ys = linearScale(imLo, imHi);
  const panel: Panel = { x: 70, y: 30, width: W - 110, height: H - 80,
                         xScale: xs, yScale: ys };
  doc.panelFrame(panel, "real (1/s)", "imaginary (rad/s)", spec.title);
  doc.vline(panel, 0.0, "#444", "2 2");

  const gmax = Math.max(...gain.filter(Number.isFinite));
  for (let i = 0; i < re.length; i++) {
    if (!Number.isFinite(re[i]) || !Number.isFinite(im[i])) continue;
    const px = panel.x + xs.unit(re[i]) * panel.width;
    const py = panel.y + panel.height - ys.unit(im[i]) * panel.height;
    const shade = gmax > 0 ? gain[i] / gmax : 0;
    const c = Math.round(40 + 160 * (1 - shade));
    doc.add(`<circle cx="${px.toFixed(2)}" cy="${py.toFixed(2)}" r="1.6" fill="rgb(${c},${c},220)"/>`);
  }
  for (const zeta of ann.zeta_rays ?? []) {
    // ray Re = -zeta |lambda|, Im = sqrt(1 - zeta^2)|lambda|
    const r = Math.max(Math.abs(xs.min), Math.abs(ys.max)) * 2;
    for (const sign of [1, -1]) {
      const pts = [[0, 0], [-zeta * r, sign * Math.sqrt(1 - zeta * zeta) * r]];
      doc.polyline(panel, pts.map((p) => p[0]), pts.map((p) => p[1]), "#3a8f3d");
    }
    doc.add(`<text x="${panel.x + 8}" y="${panel.y + 14}" font-size="9" fill="#3a8f3d">zeta rays: ${(ann.zeta_rays ?? []).join(", ")}</text>`);
  }

  const meta = { kind: "rootlocus", width: W, height: H,
                 inputs: spec.inputs.map(baseName),
                 axes: { re: { scale: "linear", min: xs.min, max: xs.max },
                         im: { scale: "linear", min: ys.min, max: ys.max } },
                 annotations: ann };
  return { svg: doc.render(meta), meta };
}

export function renderCompass(spec: FigureSpec): RenderResult {
  const table = readCsv(spec.inputs[0]);
  const ann = spec.annotations ?? {};
  const re = column(table, "re");
  const im = column(table, "im");
  const labels = textColumn(table, "machine");
  const H = 440;
  const doc = new SvgDoc(W, H);

  const r = Math.max(...re.map(Math.abs), ...im.map(Math.abs)) * 1.2;
  const xs = linearScale(-r, r, 0.0);
  const ys = linearScale(-r, r, 0.0);
  const panel: Panel = { x: 110, y: 30, width: 360, height: 360,
                         xScale: xs, yScale: ys };
  doc.panelFrame(panel, "real", "imaginary", spec.title);
  const cx = panel.x + xs.unit(0) * panel.width;
  const cy = panel.y + panel.height - ys.unit(0) * panel.height;
  const rr = xs.unit(r / 1.2) * panel.width - xs.unit(0) * panel.width;
  doc.add(`<circle cx="${cx}" cy="${cy}" r="${rr.toFixed(2)}" fill="none" stroke="#bbb" stroke-dasharray="3 3"/>`);
  for (let i = 0; i < re.length; i++) {
    doc.arrow(panel, re[i], im[i], PALETTE[i % PALETTE.length], labels[i]);
  }

  const meta = { kind: "compass", width: W, height: H,
                 inputs: spec.inputs.map(baseName),
                 axes: { re: { scale: "linear", min: xs.min, max: xs.max },
                         im: { scale: "linear", min: ys.min, max: ys.max } },
                 annotations: ann };
  return { svg: doc.render(meta), meta };
}

export function render(spec: FigureSpec): RenderResult {
  switch (spec.kind) {
    case "bode": return renderBode(spec);
    case "timeseries": return renderTimeseries(spec);
    case "rootlocus": return renderRootLocus(spec);
    case "compass": return renderCompass(spec);
    default: throw new Error(`unknown figure kind ${(spec as FigureSpec).kind}`);
  }
}
