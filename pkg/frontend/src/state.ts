// UI state machine, kept free of DOM access so it is unit-testable.
//
// Rules encoded here:
//   - the pixel picker is disabled until an image is loaded
//   - at most one match request is live: responses carrying a stale token
//     are dropped (latest pick wins)
//   - recipes remember which lookup table produced them; when the service
//     reports a different table, the stale recipes are cleared
//   - a failed health probe flips the offline banner

import type { MatchResponse, MixResponse, RGB } from "./types.js";

export interface PickedPixel {
  x: number;
  y: number;
  rgb: RGB;
}

export interface RecipeSet {
  lutHash: string;
  target: RGB;
  response: MatchResponse;
  raw: string;
}

export interface MixSelection {
  pa: number;
  qa: number;
  pb: number;
  qb: number;
}

export interface UiState {
  imageLoaded: boolean;
  picked: PickedPixel | null;
  recipes: RecipeSet | null;
  mixSelection: MixSelection | null;
  mixResult: { response: MixResponse; raw: string } | null;
  online: boolean;
  matchToken: number;
}

export function initialState(): UiState {
  return {
    imageLoaded: false,
    picked: null,
    recipes: null,
    mixSelection: null,
    mixResult: null,
    online: true,
    matchToken: 0,
  };
}

export function canPick(state: UiState): boolean {
  return state.imageLoaded && state.online;
}

export function imageLoaded(state: UiState): UiState {
  return { ...state, imageLoaded: true, picked: null, recipes: null };
}

/** A pick starts a new match request; returns the token the response must carry. */
export function pickStarted(state: UiState, pixel: PickedPixel): [UiState, number] {
  const token = state.matchToken + 1;
  return [{ ...state, picked: pixel, matchToken: token }, token];
}

export function matchReceived(
  state: UiState,
  token: number,
  target: RGB,
  response: MatchResponse,
  raw: string,
): UiState {
  if (token !== state.matchToken) {
    return state; // a newer pick superseded this response
  }
  return {
    ...state,
    recipes: { lutHash: response.lut_hash, target, response, raw },
  };
}

export function healthReceived(state: UiState, lutHash: string): UiState {
  const next = { ...state, online: true };
  if (next.recipes && next.recipes.lutHash !== lutHash) {
    next.recipes = null; // artifact changed under us; recipes are stale
  }
  return next;
}

export function healthFailed(state: UiState): UiState {
  return { ...state, online: false };
}

export function mixRequested(state: UiState, selection: MixSelection): UiState {
  return { ...state, mixSelection: selection };
}

export function mixReceived(state: UiState, response: MixResponse, raw: string): UiState {
  return { ...state, mixResult: { response, raw } };
}

/** Snap a slider value onto the service's 0.002 mL quantity grid. */
export function snapQuantity(ml: number): number {
  const ul = Math.min(160, Math.max(10, Math.round((ml * 1000) / 2) * 2));
  return ul / 1000;
}
