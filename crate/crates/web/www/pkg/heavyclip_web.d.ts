/* tslint:disable */
/* eslint-disable */

/**
 * One seeded run on a 10-dimensional cosine-sum objective.
 */
export class Simulation {
    free(): void;
    [Symbol.dispose](): void;
    gradNorm(): Float64Array;
    momentumNorm(): Float64Array;
    constructor(algo: string, q: number, p_moment: number, tail: number, horizon: number, hold: boolean, seed: bigint);
    objective(): Float64Array;
    readonly burnIn: number;
    readonly clipFraction: number;
    readonly eta: number;
    readonly tau: number;
}

/**
 * `[‖v‖_⋆, d_x, d_y, ⟨v, d(v)⟩, ‖d(v)‖]` for the dual vector `(x, y)`.
 */
export function dualityMap(q: number, x: number, y: number): Float64Array;

/**
 * For each `τ`: `[bias, variance, bias_bound, variance_bound]` of clipping a
 * symmetric scalar Pareto draw. `trials` is raised to the estimator's minimum.
 */
export function truncationCurve(tail: number, p_moment: number, taus: Float64Array, trials: number, seed: bigint): Float64Array;

/**
 * Boundary of the 2-D dual unit ball as `[x0, y0, x1, y1, ...]`.
 */
export function unitSphere(q: number, points: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_simulation_free: (a: number, b: number) => void;
    readonly dualityMap: (a: number, b: number, c: number) => [number, number, number, number];
    readonly simulation_burnIn: (a: number) => number;
    readonly simulation_clipFraction: (a: number) => number;
    readonly simulation_eta: (a: number) => number;
    readonly simulation_gradNorm: (a: number) => [number, number];
    readonly simulation_momentumNorm: (a: number) => [number, number];
    readonly simulation_new: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: bigint) => [number, number, number];
    readonly simulation_objective: (a: number) => [number, number];
    readonly simulation_tau: (a: number) => number;
    readonly truncationCurve: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
    readonly unitSphere: (a: number, b: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
