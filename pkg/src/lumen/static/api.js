async function fail(res) {
    let detail = `${res.status} ${res.statusText}`;
    try {
        const body = await res.json();
        if (body && typeof body.detail === "string")
            detail = body.detail;
    }
    catch {
        /* non-JSON error body */
    }
    throw new Error(detail);
}
/** Thin typed client over the service endpoints. */
export class ApiClient {
    constructor(baseUrl = "", fetchFn = (...args) => fetch(...args)) {
        this.baseUrl = baseUrl;
        this.fetchFn = fetchFn;
    }
    url(path) {
        return `${this.baseUrl}${path}`;
    }
    imageUrl(imageId) {
        return this.url(`/api/images/${imageId}`);
    }
    maskUrl(maskId) {
        return this.url(`/api/masks/${maskId}`);
    }
    async uploadImage(png) {
        const res = await this.fetchFn(this.url("/api/images"), {
            method: "POST",
            headers: { "content-type": "image/png" },
            body: png,
        });
        if (!res.ok)
            return fail(res);
        return res.json();
    }
    async fetchImageBytes(imageId) {
        const res = await this.fetchFn(this.imageUrl(imageId));
        if (!res.ok)
            return fail(res);
        return res.arrayBuffer();
    }
    async uploadMaskPng(png) {
        const res = await this.fetchFn(this.url("/api/masks"), {
            method: "POST",
            headers: { "content-type": "image/png" },
            body: png,
        });
        if (!res.ok)
            return fail(res);
        return res.json();
    }
    async growMask(imageId, seeds, tolerance, dilateRadius = 0) {
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
        if (!res.ok)
            return fail(res);
        return res.json();
    }
    async fetchMaskBytes(maskId) {
        const res = await this.fetchFn(this.maskUrl(maskId));
        if (!res.ok)
            return fail(res);
        return res.arrayBuffer();
    }
    async submitJob(spec) {
        const res = await this.fetchFn(this.url("/api/jobs"), {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(spec),
        });
        if (!res.ok)
            return fail(res);
        return res.json();
    }
    async getJob(jobId) {
        const res = await this.fetchFn(this.url(`/api/jobs/${jobId}`));
        if (!res.ok)
            return fail(res);
        return res.json();
    }
    async listJobs() {
        const res = await this.fetchFn(this.url("/api/jobs"));
        if (!res.ok)
            return fail(res);
        return res.json();
    }
    async postFeedback(jobId, rating, comment) {
        const res = await this.fetchFn(this.url(`/api/jobs/${jobId}/feedback`), {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify({ rating, comment }),
        });
        if (!res.ok)
            return fail(res);
        return res.json();
    }
}
