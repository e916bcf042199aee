import { ReportRequestFields, SamplingSpecBody } from "./api.js";

export type ReportKind = "topics" | "opinions" | "city_subevents";
export type ReportMode = "basic" | "advanced";

export interface ReportFormState {
  corpusId: string | null;
  kind: ReportKind;
  event: string;
  area: string;
  dateRange: string;
  city: string;
  wordLimit: number;
  mode: ReportMode;
  stakeholder: string;
}

export interface ConsoleSession {
  form: ReportFormState;
  openReportId: string | null;
  openChatId: string | null;
  chatInFlight: boolean;
}

export function emptyForm(): ReportFormState {
  return {
    corpusId: null,
    kind: "topics",
    event: "",
    area: "",
    dateRange: "",
    city: "",
    wordLimit: 400,
    mode: "advanced",
    stakeholder: "",
  };
}

export function newSession(): ConsoleSession {
  return { form: emptyForm(), openReportId: null, openChatId: null, chatInFlight: false };
}

/** Fields still missing before the form may submit; empty means valid.
 * The city is required only for city_subevents reports. */
export function missingFields(form: ReportFormState): string[] {
  const missing: string[] = [];
  if (!form.corpusId) missing.push("corpus");
  if (!form.wordLimit || form.wordLimit <= 0) missing.push("word limit");
  if (form.kind === "city_subevents" && !form.city.trim()) missing.push("city");
  return missing;
}

export function isSubmittable(form: ReportFormState): boolean {
  return missingFields(form).length === 0;
}

/** Lossless form -> request mapping; blank optional fields are omitted so
 * the service fills them from the corpus metadata. */
export function toRequestFields(form: ReportFormState): ReportRequestFields {
  const fields: ReportRequestFields = {
    mode: form.mode,
    report_kind: form.kind,
    word_limit: form.wordLimit,
  };
  if (form.event.trim()) fields.event = form.event.trim();
  if (form.area.trim()) fields.area = form.area.trim();
  if (form.dateRange.trim()) fields.date_range = form.dateRange.trim();
  if (form.kind === "city_subevents") fields.city = form.city.trim();
  if (form.stakeholder.trim()) fields.stakeholders = [form.stakeholder.trim()];
  return fields;
}

export const HUMAID_CLASSES = [
  "caution_and_advice",
  "sympathy_and_support",
  "requests_or_urgent_needs",
  "infrastructure_and_utility_damage",
  "rescue_volunteering_or_donation_effort",
  "not_humanitarian",
  "displaced_people_and_evacuations",
  "injured_or_dead_people",
  "missing_or_found_people",
] as const;

export const ENRICH_DIMENSIONS: Record<ReportKind, string[]> = {
  topics: ["disaster_event", "sentiment"],
  opinions: ["sentiment", "emotion"],
  city_subevents: ["disaster_event", "sub_event", "sentiment", "location"],
};

/** Default sampling spec for the advanced mode of each report kind. */
export function defaultSampling(kind: ReportKind, targetSize: number, city?: string): SamplingSpecBody {
  if (kind === "opinions") {
    return {
      dimensions: [
        { dimension: "sentiment", classes: ["positive", "negative"] },
        {
          dimension: "emotion",
          classes: ["anger", "anticipation", "disgust", "fear", "joy", "sadness", "surprise", "trust"],
        },
      ],
      target_size: targetSize,
      filters: null,
      cap_to_target: true,
    };
  }
  if (kind === "city_subevents") {
    return {
      dimensions: [{ dimension: "sub_event", classes: ["subevent_post"] }],
      target_size: targetSize,
      filters: city ? { city, subevent_only: true } : null,
      cap_to_target: true,
    };
  }
  return {
    dimensions: [{ dimension: "disaster_event", classes: [...HUMAID_CLASSES] }],
    target_size: targetSize,
    filters: null,
    cap_to_target: true,
  };
}
