export const DEFAULT_MASK = "[MASK]";

/**
 * Replace the word at `position` with the mask token.
 *
 * Masking happens here, before any backend sees the sentence, so no backend
 * can leak information about the focus word into its vector. The mask is a
 * single canonical token regardless of the original word; even the word's
 * subword length must not influence the output.
 */
export function maskWord(
  tokens: readonly string[],
  position: number,
  mask: string = DEFAULT_MASK,
): string[] {
  if (!Number.isInteger(position) || position < 0 || position >= tokens.length) {
    throw new RangeError(
      `position ${position} out of range for ${tokens.length} tokens`,
    );
  }
  const masked = tokens.slice();
  masked[position] = mask;
  return masked;
}
