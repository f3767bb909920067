/* tslint:disable */
/* eslint-disable */

/**
 * Ground state of a small periodic Bose-Hubbard ring and the norms of its
 * correlated nearest-neighbour blocks.
 */
export function bose_hubbard(particles: number, sites: number, j: number): string;

/**
 * Tangles and correlated-state norms of nearest-neighbour blocks of the
 * infinite transverse Ising chain.
 */
export function ising_point(j: number): string;

/**
 * Random pure states of three or four qubits: genuine tangle against the
 * one-norm of the fully correlated part.
 */
export function scatter(qubits: number, samples: number, seed: bigint): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly bose_hubbard: (a: number, b: number, c: number) => [number, number, number, number];
    readonly ising_point: (a: number) => [number, number, number, number];
    readonly scatter: (a: number, b: number, c: bigint) => [number, number, number, number];
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
