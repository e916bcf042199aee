import { ComparisonRecord, ReportRecord } from "../api.js";
import { el } from "../dom.js";
import { danglingMarkers, segmentBody } from "../markers.js";

/** Report body with [n] markers rendered as anchors into the reference
 * panel; markers without a reference are visually flagged dangling. */
export function renderReportView(report: ReportRecord): HTMLElement {
  const segments = segmentBody(report.body, report.references);
  const bodyNodes = segments.map((segment) => {
    if (segment.type === "text") return document.createTextNode(segment.text);
    if (segment.reference === null) {
      return el("span", { class: "marker dangling", title: "no source post" }, `[${segment.marker}]`);
    }
    return el(
      "a",
      { class: "marker", href: `#ref-${segment.marker}`, "data-marker": String(segment.marker) },
      `[${segment.marker}]`,
    );
  });

  const referencePanel = el(
    "ol",
    { class: "reference-panel" },
    ...report.references.map((ref) =>
      el(
        "li",
        { id: `ref-${ref.marker}`, value: String(ref.marker), "data-post-id": ref.post_id },
        el("span", { class: "excerpt" }, ref.excerpt),
        el("span", { class: "post-id" }, ` (${ref.post_id})`),
      ),
    ),
  );

  const dangling = danglingMarkers(segments);
  const manifest = report.input_manifest as { mode?: string };

  return el(
    "section",
    { class: "report-view", "data-report-id": report.id },
    el(
      "header",
      {},
      el("span", { class: "mode-badge" }, String(manifest.mode ?? report.request["mode"] ?? "")),
      el("span", { class: "kind" }, String(report.request["report_kind"] ?? "")),
    ),
    el("article", { class: "report-body" }, ...bodyNodes),
    el("h3", {}, "References"),
    report.references.length ? referencePanel : el("p", { class: "hint" }, "No post references."),
    dangling.length
      ? el("p", { class: "dangling-note" }, `Dangling markers: ${dangling.map((m) => `[${m}]`).join(" ")}`)
      : null,
  );
}

/** Coverage and quality rows for the basic-versus-advanced comparison;
 * all values come straight from the evaluation response. */
export function renderEvalPanel(comparison: ComparisonRecord): HTMLElement {
  const header = el("tr", {}, ...["Metric", "Basic", "Advanced"].map((h) => el("th", {}, h)));
  const rows = comparison.rows.map((row) =>
    el(
      "tr",
      {},
      el("td", {}, row.metric),
      el("td", { class: "num" }, row.basic.toFixed(2)),
      el("td", { class: "num" }, row.advanced.toFixed(2)),
    ),
  );
  return el(
    "section",
    { class: "eval-panel" },
    el("h3", {}, "Basic vs advanced"),
    el("table", {}, el("thead", {}, header), el("tbody", {}, ...rows)),
  );
}
