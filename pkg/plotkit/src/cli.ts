#!/usr/bin/env node
/** plotkit command line: render one figure spec, or everything a manifest lists. */

import * as fs from "fs";

import { validateSpec } from "./figspec";
import { renderManifest, writeResult } from "./manifest";
import { render } from "./render";

function usage(): never {
  process.stderr.write(
    "usage:\n" +
    "  plotkit render <figurespec.json>\n" +
    "  plotkit all <manifest.json> --out DIR\n");
  process.exit(2);
}

export function main(argv: string[]): number {
  if (argv.length < 2) usage();
  const [command, target] = argv;
  try {
    if (command === "render") {
      const spec = validateSpec(JSON.parse(fs.readFileSync(target, "utf8")));
      const out = writeResult(spec, render(spec));
      process.stdout.write(out + "\n");
      return 0;
    }
    if (command === "all") {
      const outIdx = argv.indexOf("--out");
      const outDir = outIdx >= 0 ? argv[outIdx + 1] : "figs";
      const written = renderManifest(target, outDir);
      for (const w of written) process.stdout.write(w + "\n");
      return 0;
    }
  } catch (err) {
    process.stderr.write(`plotkit: ${(err as Error).message}\n`);
    return 1;
  }
  usage();
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
