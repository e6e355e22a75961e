export { readCsv, column, textColumn, CsvError } from "./csv";
export { FigureSpec, Annotations, validateSpec } from "./figspec";
export { render, renderBode, renderTimeseries, renderRootLocus, renderCompass } from "./render";
export { renderManifest, specFromHint, writeResult } from "./manifest";
