/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_simulation_free: (a: number, b: number) => void;
export const dualityMap: (a: number, b: number, c: number) => [number, number, number, number];
export const simulation_burnIn: (a: number) => number;
export const simulation_clipFraction: (a: number) => number;
export const simulation_eta: (a: number) => number;
export const simulation_gradNorm: (a: number) => [number, number];
export const simulation_momentumNorm: (a: number) => [number, number];
export const simulation_new: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: bigint) => [number, number, number];
export const simulation_objective: (a: number) => [number, number];
export const simulation_tau: (a: number) => number;
export const truncationCurve: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
export const unitSphere: (a: number, b: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
