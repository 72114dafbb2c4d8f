/** Wire types mirroring the restoration service API. */
export {};
