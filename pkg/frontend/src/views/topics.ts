import { TopicExport } from "../api.js";
import { el } from "../dom.js";

/** Topic explorer: one row per topic T_0..T_{k-1} with its top terms and
 * size, plus a per-post badge for members selected into the report
 * sample. Sizes come from the export; badges are markup on post ids
 * returned by the API, so the console itself computes no numbers. */
export function renderTopicExplorer(
  exportDoc: TopicExport,
  sampleMembers: string[] = [],
): HTMLElement {
  const sampled = new Set(sampleMembers);
  const header = el("tr", {}, ...["Topic", "Top terms", "Size", "Posts"].map((h) => el("th", {}, h)));
  const rows = exportDoc.topics.map((topic) => {
    const postList = el(
      "span",
      { class: "post-chips" },
      ...topic.post_ids.map((postId) =>
        el(
          "code",
          { class: sampled.has(postId) ? "post-chip sampled" : "post-chip", "data-post-id": postId },
          postId,
        ),
      ),
    );
    return el(
      "tr",
      { class: "topic-row", "data-topic-id": String(topic.id) },
      el("td", { class: "topic-label" }, topic.label),
      el("td", {}, topic.terms.slice(0, 3).map((t) => t.term).join(", ")),
      el("td", { class: "num" }, String(topic.size)),
      el("td", {}, postList),
    );
  });
  return el(
    "section",
    { class: "topic-explorer" },
    el("table", {}, el("thead", {}, header), el("tbody", {}, ...rows)),
  );
}

export function renderPendingTopics(status: string): HTMLElement {
  return el("div", { class: "pending-placeholder" }, `Topic discovery ${status}...`);
}
