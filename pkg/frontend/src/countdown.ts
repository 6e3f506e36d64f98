/** Think-time countdown anchored at item receipt.
 *
 * The clock starts when the browser receives the item, which is always at
 * or after the server's delivery timestamp, so by the time this countdown
 * reaches zero the server has measured at least as much elapsed time: the
 * client gate can reject early clicks but can never let through a
 * submission the server would still refuse. A server rejection can tighten
 * the countdown further via applyRetryAfter.
 */
export class Countdown {
  private startedAt: number | null = null;
  private extraWaitUntil: number | null = null;

  constructor(
    private readonly minThinkS: number,
    private readonly now: () => number = () => Date.now() / 1000,
  ) {
    if (!(minThinkS >= 0)) throw new RangeError("minThinkS must be non-negative");
  }

  /** Call when the item is shown to the participant. Restarts the clock. */
  start(): void {
    this.startedAt = this.now();
    this.extraWaitUntil = null;
  }

  elapsedS(): number {
    if (this.startedAt === null) return 0;
    return Math.max(0, this.now() - this.startedAt);
  }

  remainingS(): number {
    const base = this.minThinkS - this.elapsedS();
    const extra = this.extraWaitUntil === null ? 0 : this.extraWaitUntil - this.now();
    return Math.max(0, base, extra);
  }

  ready(): boolean {
    return this.startedAt !== null && this.remainingS() <= 0;
  }

  /** Fold a server-side 429 into the countdown; waits whichever is longer. */
  applyRetryAfter(retryAfterS: number): void {
    const until = this.now() + Math.max(0, retryAfterS);
    if (this.extraWaitUntil === null || until > this.extraWaitUntil) {
      this.extraWaitUntil = until;
    }
  }
}
