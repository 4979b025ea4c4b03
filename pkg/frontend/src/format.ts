// View-model builders.  Displayed values are taken verbatim from service
// responses: numbers are stringified with the default shortest round-trip
// form and never recomputed or rounded, so what the card shows is exactly
// what the service sent.

import type { MixResponse, RecipeJson, RGB } from "./types.js";

export const DELTA_E_GOOD = 5.0;
export const RATIO_GAP_GOOD = 0.5;

export type Badge = "good" | "warn";

export interface IngredientView {
  label: string; // "cadmium yellow (rho5)"
  quantityText: string; // "0.018 mL"
  symbol: string;
}

export interface RecipeCardView {
  matchedRgbText: string; // "rgb(67, 110, 60)"
  matchedCss: string;
  deltaEText: string;
  deltaEBadge: Badge;
  ratioGapText: string;
  ratioBadge: Badge;
  ingredientA: IngredientView;
  ingredientB: IngredientView;
}

export function cssColor(rgb: RGB): string {
  return `rgb(${rgb[0]}, ${rgb[1]}, ${rgb[2]})`;
}

export function recipeCard(recipe: RecipeJson): RecipeCardView {
  return {
    matchedRgbText: cssColor(recipe.rgb),
    matchedCss: cssColor(recipe.rgb),
    deltaEText: String(recipe.delta_e),
    deltaEBadge: recipe.delta_e < DELTA_E_GOOD ? "good" : "warn",
    ratioGapText: String(recipe.ratio_gap),
    ratioBadge: recipe.ratio_gap < RATIO_GAP_GOOD ? "good" : "warn",
    ingredientA: {
      label: `${recipe.pigment_a.name} (${recipe.pigment_a.symbol})`,
      quantityText: `${recipe.q_a_ml} mL`,
      symbol: recipe.pigment_a.symbol,
    },
    ingredientB: {
      label: `${recipe.pigment_b.name} (${recipe.pigment_b.symbol})`,
      quantityText: `${recipe.q_b_ml} mL`,
      symbol: recipe.pigment_b.symbol,
    },
  };
}

export interface MixPanelView {
  swatchA: { css: string; rgbText: string; label: string };
  swatchB: { css: string; rgbText: string; label: string };
  swatchMix: { css: string; rgbText: string };
}

export function mixPanel(mix: MixResponse): MixPanelView {
  return {
    swatchA: {
      css: cssColor(mix.swatches.a),
      rgbText: cssColor(mix.swatches.a),
      label: `${mix.pigment_a.name}, ${mix.pigment_a.q_ml} mL`,
    },
    swatchB: {
      css: cssColor(mix.swatches.b),
      rgbText: cssColor(mix.swatches.b),
      label: `${mix.pigment_b.name}, ${mix.pigment_b.q_ml} mL`,
    },
    swatchMix: {
      css: cssColor(mix.swatches.mix),
      rgbText: cssColor(mix.swatches.mix),
    },
  };
}
