import { MaskBitmap } from "./mask.js";
import { pollJob } from "./polling.js";
export const DEFAULT_PARAMS = {
    harmonic: { solver_tol: 1e-10 },
    tv: { solver_tol: 1e-10, tv_epsilon: 1e-3, tv_outer_iters: 30 },
    exemplar: { patch_size: 9, search_window: "full", data_term_alpha: 1.0 },
    osmosis: { dt: 1000, steps: 500, steady_tol: 1e-8 },
};
/** Client-side session: the loaded image, the working mask locked to its
 * dimensions, the method form state, and the job history. Everything here
 * is reconstructible from the server after a refresh except the unsent
 * working mask. */
export class UiSession {
    constructor(api) {
        this.api = api;
        this.image = null;
        this.sourceImage = null;
        this.mask = null;
        this.method = "harmonic";
        this.params = structuredClone
            ? structuredClone(DEFAULT_PARAMS)
            : JSON.parse(JSON.stringify(DEFAULT_PARAMS));
        this.jobs = new Map();
        this.lastFinished = null;
    }
    loadImage(meta) {
        this.image = meta;
        this.mask = new MaskBitmap(meta.width, meta.height);
    }
    loadSource(meta) {
        this.sourceImage = meta;
    }
    /** Working-mask invariant: dimensions always equal the loaded image's. */
    maskMatchesImage() {
        return (this.image !== null &&
            this.mask !== null &&
            this.mask.width === this.image.width &&
            this.mask.height === this.image.height);
    }
    async refreshJobs() {
        const jobs = await this.api.listJobs();
        this.jobs.clear();
        for (const job of jobs)
            this.jobs.set(job.job_id, job);
        return jobs;
    }
    /** Client-side validation mirroring the service's submit rules. */
    validateRun() {
        if (!this.image)
            return "load an image first";
        if (this.method !== "osmosis") {
            if (!this.mask || this.mask.count() === 0) {
                return "paint or grow a mask before inpainting";
            }
            if (!this.maskMatchesImage())
                return "mask does not match the image size";
        }
        if (this.method === "osmosis" && !this.sourceImage) {
            return "osmosis needs a source image (e.g. infra-red)";
        }
        return null;
    }
    buildSpec(maskId) {
        if (!this.image)
            throw new Error("no image loaded");
        const spec = {
            method: this.method,
            params: { ...this.params[this.method] },
            input_image_id: this.image.image_id,
        };
        if (this.method !== "osmosis") {
            if (!maskId)
                throw new Error("inpainting requires a mask id");
            spec.mask_id = maskId;
        }
        else {
            if (!this.sourceImage)
                throw new Error("osmosis requires a source image");
            spec.source_image_id = this.sourceImage.image_id;
            if (maskId)
                spec.mask_id = maskId;
        }
        return spec;
    }
    /** Submit the configured job and poll it to a terminal state. */
    async runAndWait(maskPng, poll = {}) {
        const invalid = this.validateRun();
        if (invalid)
            throw new Error(invalid);
        let maskId = null;
        if (maskPng) {
            maskId = (await this.api.uploadMaskPng(maskPng)).mask_id;
        }
        const { job_id } = await this.api.submitJob(this.buildSpec(maskId));
        const job = await pollJob((id) => this.api.getJob(id), job_id, poll);
        this.jobs.set(job.job_id, job);
        if (job.status === "done" || job.status === "failed")
            this.lastFinished = job;
        return { job, maskId };
    }
}
