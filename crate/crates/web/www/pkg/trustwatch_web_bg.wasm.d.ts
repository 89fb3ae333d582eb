/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demosession_free: (a: number, b: number) => void;
export const analyzeScenario: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const deliveryScenario: () => [number, number];
export const demosession_export: (a: number) => [number, number];
export const demosession_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const demosession_remaining: (a: number) => number;
export const demosession_summary: (a: number) => [number, number];
export const demosession_trial: (a: number, b: number, c: number) => [number, number, number, number];
export const probe: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
export const randomScenario: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
