import type {
  ImageMeta,
  JobRecord,
  JobSpec,
  MaskResponse,
  SeedPoint,
} from "./types.js";

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function fail(res: Response): Promise<never> {
  let detail = `${res.status} ${res.statusText}`;
  try {
    const body = await res.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    /* non-JSON error body */
  }
  throw new Error(detail);
}

/** Thin typed client over the service endpoints. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  imageUrl(imageId: string): string {
    return this.url(`/api/images/${imageId}`);
  }

  maskUrl(maskId: string): string {
    return this.url(`/api/masks/${maskId}`);
  }

  async uploadImage(png: Blob | ArrayBuffer | Uint8Array): Promise<ImageMeta> {
    const res = await this.fetchFn(this.url("/api/images"), {
      method: "POST",
      headers: { "content-type": "image/png" },
      body: png as BodyInit,
    });
    if (!res.ok) return fail(res);
    return res.json();
  }

  async fetchImageBytes(imageId: string): Promise<ArrayBuffer> {
    const res = await this.fetchFn(this.imageUrl(imageId));
    if (!res.ok) return fail(res);
    return res.arrayBuffer();
  }

  async uploadMaskPng(png: Blob | ArrayBuffer | Uint8Array): Promise<MaskResponse> {
    const res = await this.fetchFn(this.url("/api/masks"), {
      method: "POST",
      headers: { "content-type": "image/png" },
      body: png as BodyInit,
    });
    if (!res.ok) return fail(res);
    return res.json();
  }

  async growMask(
    imageId: string,
    seeds: SeedPoint[],
    tolerance: number,
    dilateRadius = 0,
  ): Promise<MaskResponse> {
    const res = await this.fetchFn(this.url("/api/masks"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({
        image_id: imageId,
        seeds,
        tolerance,
        dilate_radius: dilateRadius,
      }),
    });
    if (!res.ok) return fail(res);
    return res.json();
  }

  async fetchMaskBytes(maskId: string): Promise<ArrayBuffer> {
    const res = await this.fetchFn(this.maskUrl(maskId));
    if (!res.ok) return fail(res);
    return res.arrayBuffer();
  }

  async submitJob(spec: JobSpec): Promise<{ job_id: string }> {
    const res = await this.fetchFn(this.url("/api/jobs"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(spec),
    });
    if (!res.ok) return fail(res);
    return res.json();
  }

  async getJob(jobId: string): Promise<JobRecord> {
    const res = await this.fetchFn(this.url(`/api/jobs/${jobId}`));
    if (!res.ok) return fail(res);
    return res.json();
  }

  async listJobs(): Promise<JobRecord[]> {
    const res = await this.fetchFn(this.url("/api/jobs"));
    if (!res.ok) return fail(res);
    return res.json();
  }

  async postFeedback(
    jobId: string,
    rating: number,
    comment: string,
  ): Promise<JobRecord> {
    const res = await this.fetchFn(this.url(`/api/jobs/${jobId}/feedback`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ rating, comment }),
    });
    if (!res.ok) return fail(res);
    return res.json();
  }
}
