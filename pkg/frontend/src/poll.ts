import { ApiClient, JobRecord } from "./api.js";

export interface PollOptions {
  intervalMs?: number;
  timeoutMs?: number;
  onTick?: (record: JobRecord) => void;
}

/**
 * Poll a job until it reaches a terminal state. Resolves with the done
 * record; rejects with the job error when it fails or the timeout hits.
 */
export async function pollJob(
  client: ApiClient,
  jobId: string,
  { intervalMs = 1000, timeoutMs = 120_000, onTick }: PollOptions = {},
): Promise<JobRecord> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const record = await client.job(jobId);
    onTick?.(record);
    if (record.status === "done") return record;
    if (record.status === "failed") {
      throw new Error(record.error ?? `job ${jobId} failed`);
    }
    if (Date.now() >= deadline) {
      throw new Error(`job ${jobId} still ${record.status} after ${timeoutMs}ms`);
    }
    await new Promise((resolve) => setTimeout(resolve, intervalMs));
  }
}
