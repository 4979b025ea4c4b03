// Wire types mirroring docs/api/*.schema.json (v1).

export type RGB = [number, number, number];

export interface PigmentRef {
  index: number;
  name: string;
  symbol: string;
}

export interface RecipeJson {
  pigment_a: PigmentRef;
  pigment_b: PigmentRef;
  q_a_ml: number;
  q_b_ml: number;
  rgb: RGB;
  lab: [number, number, number];
  delta_e: number;
  ratio_gap: number;
  good_ratio: boolean;
  good_match: boolean;
}

export interface MatchResponse {
  schema_version: number;
  lut_hash: string;
  recipes: RecipeJson[];
}

export interface MixResponse {
  schema_version: number;
  pigment_a: { index: number; name: string; q_ml: number };
  pigment_b: { index: number; name: string; q_ml: number };
  swatches: { a: RGB; b: RGB; mix: RGB };
  spectrum: number[];
}

export interface HealthResponse {
  schema_version: number;
  ready: { corpus: boolean; model: boolean; lut: boolean };
  model_hash: string;
  lut_hash: string;
}

export interface PigmentsResponse {
  schema_version: number;
  pigments: Array<{
    index: number;
    name: string;
    symbol: string;
    quantities_ml: number[];
    swatches: RGB[];
  }>;
}
