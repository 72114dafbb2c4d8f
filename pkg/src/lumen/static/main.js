import { ApiClient } from "./api.js";
import { MaskBitmap } from "./mask.js";
import { DEFAULT_PARAMS, UiSession } from "./state.js";
const api = new ApiClient("");
const session = new UiSession(api);
let tool = "paint";
let brushRadius = 6;
let seeds = [];
let previewMask = null;
let painting = false;
let lastPoint = null;
let zoom = 1;
const $ = (id) => document.getElementById(id);
const baseCanvas = $("base-canvas");
const overlayCanvas = $("overlay-canvas");
const resultImg = $("result-img");
const beforeImg = $("before-img");
const statusLine = $("status-line");
function setStatus(text, isError = false) {
    statusLine.textContent = text;
    statusLine.className = isError ? "status error" : "status";
}
function redrawOverlay() {
    const ctx = overlayCanvas.getContext("2d");
    if (!ctx || !session.mask)
        return;
    ctx.clearRect(0, 0, overlayCanvas.width, overlayCanvas.height);
    const working = new ImageData(session.mask.toOverlayRgba(), session.mask.width, session.mask.height);
    ctx.putImageData(working, 0, 0);
    if (previewMask) {
        // translucent blue preview on top of the red working mask
        const px = previewMask.toOverlayRgba();
        for (let i = 0; i < px.length; i += 4) {
            if (px[i + 3] > 0) {
                px[i] = 60;
                px[i + 2] = 255;
            }
        }
        blendImageData(ctx, new ImageData(px, previewMask.width, previewMask.height));
    }
    for (const seed of seeds) {
        ctx.fillStyle = "#ffe34d";
        ctx.fillRect(seed.x - 1, seed.y - 1, 3, 3);
    }
}
function blendImageData(ctx, data) {
    const tmp = document.createElement("canvas");
    tmp.width = data.width;
    tmp.height = data.height;
    tmp.getContext("2d").putImageData(data, 0, 0);
    ctx.drawImage(tmp, 0, 0);
}
function applyZoom() {
    const stage = $("stage");
    stage.style.transform = `scale(${zoom})`;
    stage.style.transformOrigin = "top left";
}
async function loadImageFile(file) {
    const meta = await api.uploadImage(file);
    session.loadImage(meta);
    seeds = [];
    previewMask = null;
    baseCanvas.width = overlayCanvas.width = meta.width;
    baseCanvas.height = overlayCanvas.height = meta.height;
    const img = new Image();
    img.onload = () => {
        baseCanvas.getContext("2d").drawImage(img, 0, 0);
        redrawOverlay();
    };
    img.src = api.imageUrl(meta.image_id);
    beforeImg.src = api.imageUrl(meta.image_id);
    $("image-info").textContent =
        `${meta.width}x${meta.height}, ${meta.channels} channel(s), id ${meta.image_id}`;
    setStatus(`image ${meta.image_id} loaded`);
}
function canvasPoint(ev) {
    if (!session.image)
        return null;
    const rect = overlayCanvas.getBoundingClientRect();
    const x = Math.floor(((ev.clientX - rect.left) / rect.width) * overlayCanvas.width);
    const y = Math.floor(((ev.clientY - rect.top) / rect.height) * overlayCanvas.height);
    if (x < 0 || y < 0 || x >= overlayCanvas.width || y >= overlayCanvas.height) {
        return null; // clicks outside the canvas are ignored
    }
    return { x, y };
}
function bindCanvas() {
    overlayCanvas.addEventListener("pointerdown", (ev) => {
        const pt = canvasPoint(ev);
        if (!pt || !session.mask)
            return;
        if (tool === "seed") {
            seeds.push(pt);
            redrawOverlay();
            return;
        }
        painting = true;
        lastPoint = pt;
        session.mask.beginStroke();
        session.mask.paintDot(pt.x, pt.y, brushRadius, tool === "erase");
        redrawOverlay();
        overlayCanvas.setPointerCapture(ev.pointerId);
    });
    overlayCanvas.addEventListener("pointermove", (ev) => {
        if (!painting || !session.mask)
            return;
        const pt = canvasPoint(ev);
        if (!pt || !lastPoint)
            return;
        session.mask.paintLine(lastPoint.x, lastPoint.y, pt.x, pt.y, brushRadius, tool === "erase");
        lastPoint = pt;
        redrawOverlay();
    });
    const stop = () => {
        painting = false;
        lastPoint = null;
    };
    overlayCanvas.addEventListener("pointerup", stop);
    overlayCanvas.addEventListener("pointerleave", stop);
}
async function growFromSeeds() {
    if (!session.image) {
        setStatus("load an image first", true);
        return;
    }
    if (seeds.length === 0) {
        setStatus("click seed points first (seed tool)", true);
        return;
    }
    const tolerance = Number($("tolerance").value);
    try {
        const resp = await api.growMask(session.image.image_id, seeds, tolerance);
        const bytes = await api.fetchMaskBytes(resp.mask_id);
        previewMask = await maskFromPngBytes(bytes);
        redrawOverlay();
        setStatus(`grown mask covers ${resp.count_true} pixels ` +
            `(${(resp.fraction * 100).toFixed(1)}%); accept or adjust tolerance`);
    }
    catch (err) {
        setStatus(`mask growing failed: ${err.message}`, true);
    }
}
async function maskFromPngBytes(bytes) {
    const blob = new Blob([bytes], { type: "image/png" });
    const bitmap = await createImageBitmap(blob);
    const tmp = document.createElement("canvas");
    tmp.width = bitmap.width;
    tmp.height = bitmap.height;
    const ctx = tmp.getContext("2d");
    ctx.drawImage(bitmap, 0, 0);
    const data = ctx.getImageData(0, 0, bitmap.width, bitmap.height);
    return MaskBitmap.fromRgba(data.data, bitmap.width, bitmap.height);
}
function acceptPreview() {
    if (!previewMask || !session.mask)
        return;
    session.mask.unionPixels(previewMask.snapshot());
    previewMask = null;
    seeds = [];
    redrawOverlay();
    setStatus("grown region merged into the working mask");
}
async function exportMaskPng() {
    const mask = session.mask;
    const tmp = document.createElement("canvas");
    tmp.width = mask.width;
    tmp.height = mask.height;
    tmp.getContext("2d").putImageData(new ImageData(mask.toExportRgba(), mask.width, mask.height), 0, 0);
    return new Promise((resolve, reject) => tmp.toBlob((b) => (b ? resolve(b) : reject(new Error("export failed"))), "image/png"));
}
function paramForm() {
    const method = $("method").value;
    session.method = method;
    for (const m of Object.keys(DEFAULT_PARAMS)) {
        $(`params-${m}`).style.display = m === method ? "" : "none";
    }
    $("source-row").style.display = method === "osmosis" ? "" : "none";
}
function readParams() {
    session.params.harmonic.solver_tol = numberInput("harmonic-solver-tol");
    session.params.tv.solver_tol = numberInput("tv-solver-tol");
    session.params.tv.tv_epsilon = numberInput("tv-epsilon");
    session.params.tv.tv_outer_iters = numberInput("tv-outer-iters");
    session.params.exemplar.patch_size = numberInput("patch-size");
    const win = $("search-window").value.trim();
    session.params.exemplar.search_window = win === "" || win === "full" ? "full" : Number(win);
    session.params.exemplar.data_term_alpha = numberInput("data-term-alpha");
    session.params.osmosis.dt = numberInput("osmosis-dt");
    session.params.osmosis.steps = numberInput("osmosis-steps");
    session.params.osmosis.steady_tol = numberInput("osmosis-steady-tol");
}
function numberInput(id) {
    return Number($(id).value);
}
async function run() {
    readParams();
    const invalid = session.validateRun();
    if (invalid) {
        setStatus(invalid, true);
        return;
    }
    const runButton = $("run");
    runButton.disabled = true;
    try {
        const needsMask = session.method !== "osmosis" || session.mask.count() > 0;
        const maskPng = needsMask && session.mask.count() > 0 ? await exportMaskPng() : null;
        setStatus("job submitted; polling...");
        const { job } = await session.runAndWait(maskPng, {
            intervalMs: 1000,
            onUpdate: (j) => {
                setStatus(`job ${j.job_id}: ${j.status}`);
                renderJobs();
            },
        });
        renderJobs();
        if (job.status === "failed") {
            setStatus(`job failed: ${job.error}`, true);
            return;
        }
        showResult(job);
        setStatus(`job ${job.job_id} done`);
    }
    catch (err) {
        setStatus(err.message, true);
    }
    finally {
        runButton.disabled = false;
    }
}
function showResult(job) {
    if (!job.result_image_id)
        return;
    resultImg.src = api.imageUrl(job.result_image_id);
    beforeImg.src = api.imageUrl(job.input_image_id);
    $("compare").style.display = "";
    $("result-id").textContent = `result ${job.result_image_id}`;
    const feedback = $("feedback");
    feedback.style.display = "";
    feedback.dataset.jobId = job.job_id;
    updateSlider();
}
function updateSlider() {
    const pos = Number($("slider").value);
    resultImg.style.clipPath = `inset(0 0 0 ${pos}%)`;
}
function renderJobs() {
    const list = $("job-list");
    list.innerHTML = "";
    const jobs = [...session.jobs.values()].sort((a, b) => b.created_at.localeCompare(a.created_at));
    for (const job of jobs) {
        const li = document.createElement("li");
        const stars = job.feedback ? ` ${"★".repeat(job.feedback.rating)}` : "";
        li.textContent = `${job.method} ${job.status}${stars} (${job.job_id.slice(0, 8)})`;
        li.className = `job ${job.status}`;
        if (job.status === "failed" && job.error)
            li.title = job.error;
        if (job.status === "done") {
            li.addEventListener("click", () => showResult(job));
        }
        list.appendChild(li);
    }
}
async function sendFeedback(rating) {
    const jobId = $("feedback").dataset.jobId;
    if (!jobId)
        return;
    const comment = $("comment").value;
    try {
        const job = await api.postFeedback(jobId, rating, comment);
        session.jobs.set(job.job_id, job);
        renderJobs();
        setStatus(`feedback saved (${rating}/5)`);
    }
    catch (err) {
        setStatus(`feedback rejected: ${err.message}`, true);
    }
}
function bindControls() {
    $("file").addEventListener("change", (ev) => {
        const file = ev.target.files?.[0];
        if (file)
            void loadImageFile(file).catch((e) => setStatus(e.message, true));
    });
    $("source-file").addEventListener("change", async (ev) => {
        const file = ev.target.files?.[0];
        if (!file)
            return;
        try {
            session.loadSource(await api.uploadImage(file));
            setStatus(`source image ${session.sourceImage.image_id} loaded`);
        }
        catch (e) {
            setStatus(e.message, true);
        }
    });
    for (const t of ["paint", "erase", "seed"]) {
        $(`tool-${t}`).addEventListener("click", () => {
            tool = t;
            for (const u of ["paint", "erase", "seed"]) {
                $(`tool-${u}`).classList.toggle("active", u === t);
            }
        });
    }
    $("brush-radius").addEventListener("input", () => {
        brushRadius = numberInput("brush-radius");
        $("brush-label").textContent = String(brushRadius);
    });
    $("undo").addEventListener("click", () => {
        if (session.mask?.undo())
            redrawOverlay();
    });
    $("clear-mask").addEventListener("click", () => {
        session.mask?.clear();
        previewMask = null;
        seeds = [];
        redrawOverlay();
    });
    $("grow").addEventListener("click", () => void growFromSeeds());
    $("accept-preview").addEventListener("click", acceptPreview);
    $("clear-seeds").addEventListener("click", () => {
        seeds = [];
        previewMask = null;
        redrawOverlay();
    });
    $("method").addEventListener("change", paramForm);
    $("run").addEventListener("click", () => void run());
    $("slider").addEventListener("input", updateSlider);
    $("zoom-in").addEventListener("click", () => {
        zoom = Math.min(8, zoom * 2);
        applyZoom();
    });
    $("zoom-out").addEventListener("click", () => {
        zoom = Math.max(0.125, zoom / 2);
        applyZoom();
    });
    for (let star = 1; star <= 5; star++) {
        $(`star-${star}`).addEventListener("click", () => void sendFeedback(star));
    }
}
async function init() {
    bindControls();
    bindCanvas();
    paramForm();
    try {
        await session.refreshJobs();
        renderJobs();
    }
    catch {
        setStatus("service unreachable; start it with: lumen serve", true);
    }
}
void init();
