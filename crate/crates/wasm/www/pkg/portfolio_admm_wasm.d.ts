/* tslint:disable */
/* eslint-disable */

export function efficientFrontier(csv: string, points: number, strategy: string, adaptive: boolean): string;

export function raceStrategies(csv: string, target_return: number): string;

export function sampleMarket(assets: number, periods: number, seed: number, condition?: number | null): string;

export function solvePortfolio(csv: string, target_return: number, strategy: string, lambda: number | null | undefined, adaptive: boolean): string;

export function summarize(csv: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly efficientFrontier: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly raceStrategies: (a: number, b: number, c: number) => [number, number, number, number];
    readonly sampleMarket: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly solvePortfolio: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly summarize: (a: number, b: number) => [number, number, number, number];
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
