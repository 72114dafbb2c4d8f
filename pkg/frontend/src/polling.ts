import type { JobRecord } from "./types.js";

export interface PollOptions {
  intervalMs?: number;
  timeoutMs?: number;
  sleep?: (ms: number) => Promise<void>;
  onUpdate?: (job: JobRecord) => void;
}

const defaultSleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

/** Poll one job until it reaches a terminal state.
 *
 * At most one request is in flight at a time; updates stream through
 * onUpdate so the UI can show queued/running progress. Resolves with the
 * terminal record (done or failed); the caller decides how to surface a
 * failed job's error string.
 */
export async function pollJob(
  fetchJob: (jobId: string) => Promise<JobRecord>,
  jobId: string,
  options: PollOptions = {},
): Promise<JobRecord> {
  const interval = options.intervalMs ?? 1000;
  const sleep = options.sleep ?? defaultSleep;
  const deadline =
    options.timeoutMs === undefined ? null : Date.now() + options.timeoutMs;
  for (;;) {
    const job = await fetchJob(jobId);
    options.onUpdate?.(job);
    if (job.status === "done" || job.status === "failed") return job;
    if (deadline !== null && Date.now() >= deadline) {
      throw new Error(`job ${jobId} still ${job.status} after timeout`);
    }
    await sleep(interval);
  }
}
