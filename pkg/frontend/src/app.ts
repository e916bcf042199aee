import { ApiClient, ApiError, ComparisonRecord, DatasetSummary, ReportRecord, TopicExport } from "./api.js";
import { clear, el } from "./dom.js";
import { pollJob } from "./poll.js";
import {
  ConsoleSession,
  ENRICH_DIMENSIONS,
  ReportFormState,
  defaultSampling,
  newSession,
  toRequestFields,
} from "./state.js";
import { renderChatPanel } from "./views/chat.js";
import { renderDatasetList, renderErrorBanner } from "./views/datasets.js";
import { renderReportForm } from "./views/reportForm.js";
import { renderEvalPanel, renderReportView } from "./views/reportView.js";
import { renderPendingTopics, renderTopicExplorer } from "./views/topics.js";

interface Slots {
  datasets: HTMLElement;
  form: HTMLElement;
  report: HTMLElement;
  chat: HTMLElement;
  topics: HTMLElement;
  status: HTMLElement;
}

export class ConsoleApp {
  session: ConsoleSession = newSession();
  private datasets: DatasetSummary[] = [];
  private report: ReportRecord | null = null;
  private comparison: ComparisonRecord | null = null;
  private chatError: string | null = null;
  private chatTurns: { question: string; answer: string }[] = [];
  private fieldErrors: Record<string, string> = {};
  private pollIntervalMs: number;

  constructor(
    private client: ApiClient,
    private slots: Slots,
    options: { pollIntervalMs?: number } = {},
  ) {
    this.pollIntervalMs = options.pollIntervalMs ?? 1000;
  }

  async start(): Promise<void> {
    await this.refreshDatasets();
  }

  private setStatus(text: string): void {
    clear(this.slots.status);
    if (text) this.slots.status.append(el("span", { class: "status-line" }, text));
  }

  async refreshDatasets(): Promise<void> {
    clear(this.slots.datasets);
    try {
      const { datasets } = await this.client.listDatasets();
      this.datasets = datasets;
      this.slots.datasets.append(
        renderDatasetList(datasets, { onSelect: (dataset) => this.selectDataset(dataset) }),
      );
    } catch (err) {
      this.slots.datasets.append(
        renderErrorBanner(
          err instanceof ApiError && err.status === 0
            ? "Cannot reach the crisisbrief service."
            : `Failed to load datasets: ${String(err)}`,
          () => void this.refreshDatasets(),
        ),
      );
    }
  }

  selectDataset(dataset: DatasetSummary): void {
    this.session.form = { ...this.session.form, corpusId: dataset.id };
    this.renderForm();
    void this.showTopics(dataset);
  }

  renderForm(): void {
    clear(this.slots.form);
    this.slots.form.append(
      renderReportForm(
        this.session.form,
        {
          onChange: (form) => {
            this.session.form = form;
            this.renderForm();
          },
          onSubmit: (form) => void this.generateReport(form),
        },
        this.fieldErrors,
      ),
    );
  }

  /** Ensure the enrichment the report kind needs exists, then create the
   * report and open its view. Service 422s surface inline on the form. */
  async generateReport(form: ReportFormState): Promise<void> {
    if (!form.corpusId) return;
    this.fieldErrors = {};
    try {
      if (form.mode === "advanced") {
        const needed = ENRICH_DIMENSIONS[form.kind];
        const dataset = this.datasets.find((d) => d.id === form.corpusId);
        const covered = dataset?.enrichments.some((e) => needed.every((dim) => e.dimensions.includes(dim)));
        if (!covered) {
          this.setStatus(`Enriching ${needed.join(", ")}...`);
          const handle = await this.client.enrich(form.corpusId, needed);
          await pollJob(this.client, handle.job_id, { intervalMs: this.pollIntervalMs });
          await this.refreshDatasets();
        }
      }
      this.setStatus("Generating report...");
      const sampling =
        form.mode === "advanced"
          ? defaultSampling(form.kind, 50, form.kind === "city_subevents" ? form.city : undefined)
          : undefined;
      const { report } = await this.client.createReport({
        corpus_id: form.corpusId,
        request: toRequestFields(form),
        ...(sampling ? { sampling } : {}),
      });
      this.report = report;
      this.session.openReportId = report.id;
      this.chatTurns = [];
      this.session.openChatId = null;
      this.comparison = null;
      this.setStatus("");
      this.renderReport();
      await this.refreshDatasets();
    } catch (err) {
      this.setStatus("");
      if (err instanceof ApiError && err.status === 422) {
        const field = err.code === "missing_sampling" || err.code === "not_enriched" ? "mode" : "city";
        this.fieldErrors = { [field]: err.message };
        if (/city/i.test(err.message)) this.fieldErrors = { city: err.message };
        if (/word/i.test(err.message)) this.fieldErrors = { word_limit: err.message };
        this.renderForm();
      } else {
        this.setStatus(`Report generation failed: ${String(err)}`);
      }
    }
  }

  renderReport(): void {
    clear(this.slots.report);
    if (!this.report) return;
    this.slots.report.append(renderReportView(this.report));
    if (this.comparison) this.slots.report.append(renderEvalPanel(this.comparison));
    this.renderChat();
  }

  async compareWith(basicReportId: string): Promise<void> {
    if (!this.report) return;
    const { comparison } = await this.client.createEval({
      basic_report_id: basicReportId,
      advanced_report_id: this.report.id,
    });
    this.comparison = comparison;
    this.renderReport();
  }

  renderChat(): void {
    clear(this.slots.chat);
    this.slots.chat.append(
      renderChatPanel(
        { turns: this.chatTurns, inFlight: this.session.chatInFlight, error: this.chatError },
        {
          onSend: (question) => void this.sendChat(question),
          onRetry: (question) => void this.sendChat(question),
        },
      ),
    );
  }

  async sendChat(question: string): Promise<void> {
    if (!this.report || this.session.chatInFlight) return;
    this.session.chatInFlight = true;
    this.chatError = null;
    this.renderChat();
    try {
      if (!this.session.openChatId) {
        const chat = await this.client.createChat(this.report.id);
        this.session.openChatId = chat.id;
      }
      const { answer } = await this.client.sendChatMessage(this.session.openChatId, question);
      this.chatTurns = [...this.chatTurns, { question, answer }];
    } catch (err) {
      this.chatError = `Turn failed: ${err instanceof Error ? err.message : String(err)}`;
    } finally {
      this.session.chatInFlight = false;
      this.renderChat();
    }
  }

  async showTopics(dataset: DatasetSummary): Promise<void> {
    clear(this.slots.topics);
    const latest = dataset.topics[dataset.topics.length - 1];
    if (!latest) {
      this.slots.topics.append(renderPendingTopics("not started"));
      return;
    }
    const record = await this.client.artifact<{ export: TopicExport }>("topics", latest.id);
    let members: string[] = [];
    const sampleId = dataset.samples[dataset.samples.length - 1];
    if (sampleId) {
      const sampleRecord = await this.client.artifact<{ sample: { members: string[] } }>(
        "samples",
        sampleId,
      );
      members = sampleRecord.sample.members;
    }
    this.slots.topics.append(renderTopicExplorer(record.export, members));
  }
}

export function mount(root: HTMLElement, client: ApiClient, options: { pollIntervalMs?: number } = {}): ConsoleApp {
  const slots: Slots = {
    status: el("div", { id: "status" }),
    datasets: el("div", { id: "datasets" }),
    form: el("div", { id: "report-form-slot" }),
    report: el("div", { id: "report-slot" }),
    chat: el("div", { id: "chat-slot" }),
    topics: el("div", { id: "topics-slot" }),
  };
  root.append(
    el("h1", {}, "crisisbrief console"),
    slots.status,
    el("h2", {}, "Datasets"),
    slots.datasets,
    el("h2", {}, "Generate a report"),
    slots.form,
    slots.report,
    slots.chat,
    el("h2", {}, "Topic explorer"),
    slots.topics,
  );
  const app = new ConsoleApp(client, slots, options);
  app.renderForm();
  void app.start();
  return app;
}
