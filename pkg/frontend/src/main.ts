// DOM wiring: canvas eyedropper on the left, recipe cards and the mix panel
// on the right.  All color values rendered here come from service responses.

import { ApiClient, ApiError } from "./api.js";
import { cssColor, mixPanel, recipeCard } from "./format.js";
import { pickPixel } from "./pixel.js";
import {
  canPick,
  healthFailed,
  healthReceived,
  imageLoaded,
  initialState,
  matchReceived,
  mixReceived,
  pickStarted,
  snapQuantity,
  UiState,
} from "./state.js";
import type { PigmentsResponse } from "./types.js";

const TOP_K = 3;
const HEALTH_POLL_MS = 10_000;

const api = new ApiClient("");
let state: UiState = initialState();
let abortController: AbortController | null = null;
let pigmentsCache: PigmentsResponse | null = null;

const el = (id: string) => document.getElementById(id) as HTMLElement;

function render() {
  el("offline-banner").hidden = state.online;
  const canvas = document.getElementById("image-canvas") as HTMLCanvasElement;
  canvas.classList.toggle("pickable", canPick(state));
  el("pick-hint").textContent = state.imageLoaded
    ? "Click the image to look up a mixing recipe for that pixel."
    : "Load an image to enable the color picker.";

  const picked = el("picked-info");
  if (state.picked) {
    picked.hidden = false;
    const swatch = el("picked-swatch");
    swatch.style.background = cssColor(state.picked.rgb);
    el("picked-text").textContent =
      `picked ${cssColor(state.picked.rgb)} at (${state.picked.x}, ${state.picked.y})`;
  } else {
    picked.hidden = true;
  }

  const cards = el("recipe-cards");
  cards.innerHTML = "";
  if (state.recipes) {
    for (const recipe of state.recipes.response.recipes) {
      const view = recipeCard(recipe);
      const card = document.createElement("div");
      card.className = "card";
      card.innerHTML = `
        <div class="swatch" style="background:${view.matchedCss}"></div>
        <div class="card-body">
          <div class="matched">${view.matchedRgbText}</div>
          <div class="ingredient">${view.ingredientA.label}: <b>${view.ingredientA.quantityText}</b></div>
          <div class="ingredient">${view.ingredientB.label}: <b>${view.ingredientB.quantityText}</b></div>
          <div>
            <span class="badge ${view.deltaEBadge}" title="color difference to target">dE ${view.deltaEText}</span>
            <span class="badge ${view.ratioBadge}" title="|qa-qb|/(qa+qb); under 0.5 stays near the trained ratios">ratio gap ${view.ratioGapText}</span>
          </div>
        </div>`;
      cards.appendChild(card);
    }
    el("lut-hash").textContent = `table ${state.recipes.lutHash.slice(0, 12)}`;
  }

  const mixResult = el("mix-result");
  mixResult.innerHTML = "";
  if (state.mixResult) {
    const view = mixPanel(state.mixResult.response);
    for (const swatch of [view.swatchA, view.swatchB, view.swatchMix]) {
      const box = document.createElement("div");
      box.className = "mix-swatch";
      const label = "label" in swatch && swatch.label ? `<div>${swatch.label}</div>` : "<div>mixture</div>";
      box.innerHTML = `<div class="swatch" style="background:${swatch.css}"></div>${label}<code>${swatch.rgbText}</code>`;
      mixResult.appendChild(box);
    }
  }
}

function loadImage(file: File) {
  const canvas = document.getElementById("image-canvas") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  const img = new Image();
  img.onload = () => {
    canvas.width = img.width;
    canvas.height = img.height;
    ctx.drawImage(img, 0, 0);
    state = imageLoaded(state);
    render();
  };
  img.src = URL.createObjectURL(file);
}

async function onCanvasClick(event: MouseEvent) {
  if (!canPick(state)) return;
  const canvas = document.getElementById("image-canvas") as HTMLCanvasElement;
  const rect = canvas.getBoundingClientRect();
  const x = ((event.clientX - rect.left) / rect.width) * canvas.width;
  const y = ((event.clientY - rect.top) / rect.height) * canvas.height;
  const ctx = canvas.getContext("2d")!;
  const raster = ctx.getImageData(0, 0, canvas.width, canvas.height);
  const rgb = pickPixel(raster, x, y);

  const [next, token] = pickStarted(state, { x: Math.floor(x), y: Math.floor(y), rgb });
  state = next;
  render();

  abortController?.abort(); // latest pick wins
  abortController = new AbortController();
  try {
    const result = await api.match(rgb, TOP_K, abortController.signal);
    state = matchReceived(state, token, rgb, result.data, result.raw);
  } catch (err) {
    if (err instanceof ApiError) {
      el("recipe-cards").textContent = `service error: ${err.message}`;
    }
    if (err instanceof TypeError) {
      state = healthFailed(state);
    }
  }
  render();
}

async function refreshHealth() {
  try {
    const result = await api.health();
    state = healthReceived(state, result.data.lut_hash);
  } catch {
    state = healthFailed(state);
  }
  render();
}

async function populateMixPanel() {
  const result = await api.pigments();
  pigmentsCache = result.data;
  for (const suffix of ["a", "b"]) {
    const select = document.getElementById(`pigment-${suffix}`) as HTMLSelectElement;
    select.innerHTML = "";
    for (const pigment of pigmentsCache.pigments) {
      const option = document.createElement("option");
      option.value = String(pigment.index);
      option.textContent = `${pigment.index}. ${pigment.name}`;
      select.appendChild(option);
    }
  }
  renderPigmentGrid();
}

function renderPigmentGrid() {
  if (!pigmentsCache) return;
  const grid = el("pigment-grid");
  grid.innerHTML = "";
  for (const pigment of pigmentsCache.pigments) {
    const column = document.createElement("div");
    column.className = "pigment-column";
    column.title = `${pigment.index}. ${pigment.name}`;
    // top of the column = largest quantity, as painted gradation strips
    for (let i = pigment.swatches.length - 1; i >= 0; i -= 5) {
      const cell = document.createElement("div");
      cell.className = "pigment-cell";
      cell.style.background = cssColor(pigment.swatches[i]);
      column.appendChild(cell);
    }
    grid.appendChild(column);
  }
}

function sliderValue(suffix: string): number {
  const slider = document.getElementById(`quantity-${suffix}`) as HTMLInputElement;
  const snapped = snapQuantity(Number(slider.value));
  (document.getElementById(`quantity-${suffix}-label`) as HTMLElement).textContent =
    `${snapped} mL`;
  return snapped;
}

async function onMixSubmit(event: Event) {
  event.preventDefault();
  const pa = Number((document.getElementById("pigment-a") as HTMLSelectElement).value);
  const pb = Number((document.getElementById("pigment-b") as HTMLSelectElement).value);
  const qa = sliderValue("a");
  const qb = sliderValue("b");
  try {
    const result = await api.mix(pa, qa, pb, qb);
    state = mixReceived(state, result.data, result.raw);
  } catch (err) {
    el("mix-result").textContent =
      err instanceof ApiError ? `service error: ${err.message}` : "request failed";
    return;
  }
  render();
}

export function start() {
  (document.getElementById("image-input") as HTMLInputElement).addEventListener(
    "change",
    (e) => {
      const file = (e.target as HTMLInputElement).files?.[0];
      if (file) loadImage(file);
    },
  );
  document.getElementById("image-canvas")!.addEventListener("click", onCanvasClick);
  document.getElementById("mix-form")!.addEventListener("submit", onMixSubmit);
  for (const suffix of ["a", "b"]) {
    document
      .getElementById(`quantity-${suffix}`)!
      .addEventListener("input", () => sliderValue(suffix));
  }
  refreshHealth();
  populateMixPanel().catch(() => healthFailed(state));
  setInterval(refreshHealth, HEALTH_POLL_MS);
  render();
}

if (typeof document !== "undefined" && document.getElementById("image-canvas")) {
  start();
}
