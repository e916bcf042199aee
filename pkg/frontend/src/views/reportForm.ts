import { el } from "../dom.js";
import { ReportFormState, ReportKind, ReportMode, isSubmittable, missingFields } from "../state.js";

export interface ReportFormHandlers {
  onChange: (form: ReportFormState) => void;
  onSubmit: (form: ReportFormState) => void;
}

const KINDS: { value: ReportKind; label: string }[] = [
  { value: "topics", label: "Topics (media)" },
  { value: "opinions", label: "Opinions (media)" },
  { value: "city_subevents", label: "City sub-events (police / EMS / firefighters)" },
];

const STAKEHOLDERS = ["", "media", "police", "ems", "firefighter", "government_organization"];

/** Report request form. Submit stays disabled until the required fields
 * for the chosen kind are present; validation errors from the service
 * surface inline under the offending field. */
export function renderReportForm(
  form: ReportFormState,
  handlers: ReportFormHandlers,
  fieldErrors: Record<string, string> = {},
): HTMLElement {
  const update = (patch: Partial<ReportFormState>) => handlers.onChange({ ...form, ...patch });

  const kindSelect = el(
    "select",
    {
      id: "report-kind",
      change: (event) => update({ kind: (event.target as HTMLSelectElement).value as ReportKind }),
    },
    ...KINDS.map(({ value, label }) =>
      el("option", { value, ...(form.kind === value ? { selected: true } : {}) }, label),
    ),
  );

  const modeToggle = el(
    "div",
    { class: "mode-toggle" },
    ...(["basic", "advanced"] as ReportMode[]).map((mode) =>
      el(
        "label",
        { class: form.mode === mode ? "mode selected" : "mode" },
        el("input", {
          type: "radio",
          name: "mode",
          value: mode,
          ...(form.mode === mode ? { checked: true } : {}),
          change: () => update({ mode }),
        }),
        mode,
      ),
    ),
  );

  const cityField = el(
    "div",
    { class: "field" },
    el("label", { for: "city" }, "City"),
    el("input", {
      id: "city",
      value: form.city,
      placeholder: "required for city sub-events",
      input: (event) => update({ city: (event.target as HTMLInputElement).value }),
    }),
    form.kind === "city_subevents" && !form.city.trim()
      ? el("span", { class: "field-hint" }, "city is required for this report kind")
      : null,
    fieldErrors["city"] ? el("span", { class: "field-error" }, fieldErrors["city"]) : null,
  );

  const submittable = isSubmittable(form);
  const missing = missingFields(form);

  return el(
    "form",
    {
      class: "report-form",
      submit: (event) => {
        event.preventDefault();
        if (isSubmittable(form)) handlers.onSubmit(form);
      },
    },
    el("div", { class: "field" }, el("label", { for: "report-kind" }, "Report kind"), kindSelect),
    modeToggle,
    el(
      "div",
      { class: "field" },
      el("label", { for: "event" }, "Event"),
      el("input", {
        id: "event",
        value: form.event,
        placeholder: "defaults from the dataset",
        input: (event) => update({ event: (event.target as HTMLInputElement).value }),
      }),
    ),
    el(
      "div",
      { class: "field" },
      el("label", { for: "area" }, "Area"),
      el("input", {
        id: "area",
        value: form.area,
        input: (event) => update({ area: (event.target as HTMLInputElement).value }),
      }),
    ),
    el(
      "div",
      { class: "field" },
      el("label", { for: "date-range" }, "Date range"),
      el("input", {
        id: "date-range",
        value: form.dateRange,
        input: (event) => update({ dateRange: (event.target as HTMLInputElement).value }),
      }),
    ),
    cityField,
    el(
      "div",
      { class: "field" },
      el("label", { for: "word-limit" }, "Word limit"),
      el("input", {
        id: "word-limit",
        type: "number",
        value: String(form.wordLimit),
        input: (event) => update({ wordLimit: Number((event.target as HTMLInputElement).value) }),
      }),
      fieldErrors["word_limit"] ? el("span", { class: "field-error" }, fieldErrors["word_limit"]) : null,
    ),
    el(
      "div",
      { class: "field" },
      el("label", { for: "stakeholder" }, "Stakeholder"),
      el(
        "select",
        {
          id: "stakeholder",
          change: (event) => update({ stakeholder: (event.target as HTMLSelectElement).value }),
        },
        ...STAKEHOLDERS.map((s) =>
          el("option", { value: s, ...(form.stakeholder === s ? { selected: true } : {}) }, s || "(any)"),
        ),
      ),
    ),
    el(
      "button",
      { type: "submit", class: "submit", disabled: !submittable },
      form.mode === "advanced" ? "Generate advanced report" : "Generate basic report",
    ),
    submittable ? null : el("span", { class: "field-hint submit-hint" }, `missing: ${missing.join(", ")}`),
  );
}
