/* tslint:disable */
/* eslint-disable */

/**
 * Exact exponent table for `k_min..=k_max`.
 */
export function delta_table(k_min: number, k_max: number): string;

/**
 * Samples of the singular-integral density on `[0, B]`.
 */
export function density_profile(k: number, which: number, b: number, n: number): string;

/**
 * `|f_k(alpha)|` across the unit window with the major arcs marked.
 */
export function weyl_profile(x: bigint, k: number, n: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly delta_table: (a: number, b: number) => [number, number, number, number];
    readonly density_profile: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly weyl_profile: (a: bigint, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
