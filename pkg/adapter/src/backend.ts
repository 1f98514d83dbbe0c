/**
 * A contextual encoder behind the server. `encode` receives tokens whose
 * focus position has already been replaced by `maskToken`; it must return a
 * vector of exactly `dim` numbers for that position.
 */
export interface Backend {
  readonly name: string;
  readonly dim: number;
  readonly maskToken: string;
  /** Extra handshake fields, e.g. the truncation policy. */
  readonly metadata: Record<string, unknown>;
  encode(maskedTokens: readonly string[], position: number): Promise<number[]>;
  close?(): Promise<void>;
}
