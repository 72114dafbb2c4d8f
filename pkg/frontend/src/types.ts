/** Wire types mirroring the restoration service API. */

export interface ImageMeta {
  image_id: string;
  width: number;
  height: number;
  channels: number;
}

export interface MaskResponse {
  mask_id: string;
  count_true: number;
  fraction: number;
  width: number;
  height: number;
}

export type JobStatus = "queued" | "running" | "done" | "failed";

export type JobMethod = "harmonic" | "tv" | "exemplar" | "osmosis";

export interface Feedback {
  rating: number;
  comment: string;
}

export interface JobRecord {
  job_id: string;
  method: JobMethod;
  params: Record<string, unknown>;
  input_image_id: string;
  mask_id: string | null;
  source_image_id: string | null;
  status: JobStatus;
  result_image_id: string | null;
  error: string | null;
  created_at: string;
  finished_at: string | null;
  feedback: Feedback | null;
}

export interface JobSpec {
  method: JobMethod;
  params: Record<string, unknown>;
  input_image_id: string;
  mask_id?: string;
  source_image_id?: string;
}

export interface SeedPoint {
  x: number;
  y: number;
}
