/* tslint:disable */
/* eslint-disable */

export class DemoSession {
    free(): void;
    [Symbol.dispose](): void;
    export(): string;
    constructor(scenario: string, seed: number, trial_limit: number, merged: boolean);
    remaining(): number;
    summary(): string;
    trial(strategy: Float64Array): string;
}

export function analyzeScenario(scenario: string, boundary_source: string, epsilon: number, resolution: number): string;

export function deliveryScenario(): string;

export function probe(scenario: string, boundary_source: string, epsilon: number, strategy: Float64Array): string;

export function randomScenario(seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demosession_free: (a: number, b: number) => void;
    readonly analyzeScenario: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly deliveryScenario: () => [number, number];
    readonly demosession_export: (a: number) => [number, number];
    readonly demosession_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly demosession_remaining: (a: number) => number;
    readonly demosession_summary: (a: number) => [number, number];
    readonly demosession_trial: (a: number, b: number, c: number) => [number, number, number, number];
    readonly probe: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly randomScenario: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
