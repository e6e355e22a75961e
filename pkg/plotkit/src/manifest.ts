/** Render every plottable artifact a podlim manifest lists. */

import * as fs from "fs";
import * as path from "path";

import { FigureSpec } from "./figspec";
import { render, RenderResult } from "./render";

interface ManifestFile {
  name: string;
  sha256: string;
  plot: Record<string, unknown> | null;
}

interface Manifest {
  figure: string;
  files: ManifestFile[];
  annotations?: Record<string, unknown>;
}

export function specFromHint(csvPath: string, hint: Record<string, unknown>,
                             outDir: string,
                             manifestAnnotations?: Record<string, unknown>): FigureSpec {
  const annotations: Record<string, unknown> = {};
  if (hint.band) annotations.band = hint.band;
  else if (manifestAnnotations?.band) annotations.band = manifestAnnotations.band;
  if (hint.zeta_rays) annotations.zeta_rays = hint.zeta_rays;
  if (hint.disturbance_window) annotations.disturbance_window = hint.disturbance_window;
  if (hint.saturation_mw !== undefined) annotations.saturation_mw = hint.saturation_mw;
  const spec: FigureSpec = {
    kind: hint.kind as FigureSpec["kind"],
    inputs: [csvPath],
    output: path.join(outDir, path.basename(csvPath).replace(/\.csv$/, ".svg")),
    annotations,
    title: path.basename(csvPath).replace(/\.csv$/, ""),
  };
  if (hint.x) spec.x = hint.x as string;
  if (hint.y) spec.y = hint.y as string[];
  return spec;
}

export function writeResult(spec: FigureSpec, result: RenderResult): string {
  fs.mkdirSync(path.dirname(spec.output), { recursive: true });
  fs.writeFileSync(spec.output, result.svg);
  fs.writeFileSync(spec.output.replace(/\.svg$/, ".meta.json"),
                   JSON.stringify(result.meta, null, 1) + "\n");
  return spec.output;
}

export function renderManifest(manifestPath: string, outDir: string): string[] {
  const manifest = JSON.parse(fs.readFileSync(manifestPath, "utf8")) as Manifest;
  const dir = path.dirname(manifestPath);
  const written: string[] = [];
  for (const entry of manifest.files) {
    if (!entry.plot || !entry.plot.kind) continue;
    const spec = specFromHint(path.join(dir, entry.name), entry.plot, outDir,
                              manifest.annotations);
    const result = render(spec);
    written.push(writeResult(spec, result));
  }
  return written;
}
