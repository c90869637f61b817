/** Serializes uploads: one request in flight, later selections wait in line. */

export class UploadQueue {
  private tail: Promise<void> = Promise.resolve();
  private waiting = 0;

  /** Number of jobs queued or running right now. */
  get pending(): number {
    return this.waiting;
  }

  /** Runs `job` after every previously enqueued job has settled. */
  enqueue<T>(job: () => Promise<T>): Promise<T> {
    this.waiting += 1;
    const run = this.tail.then(job);
    this.tail = run.then(
      () => {
        this.waiting -= 1;
      },
      () => {
        this.waiting -= 1;
      },
    );
    return run;
  }
}
