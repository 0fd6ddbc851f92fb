export { readCsv, num, requireNum } from "./csv";
export type { CsvTable } from "./csv";
export { render, renderToString } from "./render";
export type { PlotSpec } from "./render";
export {
  EmptyDataError, FIGURE_KINDS, METRICS_COLUMNS, REQUIRED_COLUMNS,
  SchemaError, TRACE_COLUMNS, requireColumns,
} from "./schema";
export type { FigureKind } from "./schema";
export { DEFAULT_STYLE, loadStyle } from "./style";
export type { Style } from "./style";
