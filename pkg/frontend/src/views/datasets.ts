import { DatasetSummary } from "../api.js";
import { el } from "../dom.js";

export interface DatasetListHandlers {
  onSelect?: (dataset: DatasetSummary) => void;
}

/** Dataset table: one row per corpus with counts and enrichment status.
 * Every number shown is taken verbatim from the listing response. */
export function renderDatasetList(
  datasets: DatasetSummary[],
  handlers: DatasetListHandlers = {},
): HTMLElement {
  if (datasets.length === 0) {
    return el(
      "div",
      { class: "empty-state" },
      el("p", {}, "No datasets yet."),
      el("p", { class: "hint" }, "Upload a JSON-lines or CSV post file to get started."),
    );
  }
  const header = el(
    "tr",
    {},
    ...["Event", "Area", "Posts", "Dropped", "Enrichment", "Topics", "Reports"].map((h) => el("th", {}, h)),
  );
  const rows = datasets.map((dataset) => {
    const enrichment =
      dataset.enrichments.length === 0
        ? el("span", { class: "status pending" }, "not enriched")
        : el(
            "span",
            { class: "status done" },
            dataset.enrichments.map((e) => e.dimensions.join(", ")).join(" | "),
          );
    const topics =
      dataset.topics.length === 0
        ? el("span", { class: "status pending" }, "none")
        : el("span", { class: "status done" }, dataset.topics.map((t) => `k=${t.selected_k}`).join(", "));
    return el(
      "tr",
      { class: "dataset-row", "data-corpus-id": dataset.id, click: () => handlers.onSelect?.(dataset) },
      el("td", {}, dataset.event_name || dataset.id),
      el("td", {}, dataset.area),
      el("td", { class: "num posts-count" }, String(dataset.posts)),
      el("td", { class: "num" }, String(dataset.dropped)),
      el("td", {}, enrichment),
      el("td", {}, topics),
      el("td", { class: "num" }, String(dataset.reports.length)),
    );
  });
  return el("table", { class: "dataset-table" }, el("thead", {}, header), el("tbody", {}, ...rows));
}

/** Connectivity failures render as a retryable banner, never a crash. */
export function renderErrorBanner(message: string, onRetry: () => void): HTMLElement {
  return el(
    "div",
    { class: "error-banner", role: "alert" },
    el("span", {}, message),
    el("button", { class: "retry", click: onRetry }, "Retry"),
  );
}
