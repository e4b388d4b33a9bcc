/** Typed errors mirroring the engine's machine-readable error names. */

export class SeselError extends Error {
  readonly errorName: string;
  readonly exitCode: number;

  constructor(errorName: string, message: string, exitCode = 3) {
    super(message);
    this.name = errorName;
    this.errorName = errorName;
    this.exitCode = exitCode;
  }
}

export class UsageError extends SeselError {
  constructor(message: string, errorName = "UsageError") {
    super(errorName, message, 2);
  }
}

const EXIT_CODES: Record<string, number> = {
  UsageError: 2,
  InvalidK: 2,
  SameNode: 2,
  TooLarge: 2,
  InvalidBeta: 2,
  CapacityTooSmall: 2,
  InfeasibleBudget: 4,
};

/** Build the typed error for a CLI failure line like `error: FormatError: ...`. */
export function errorFromCli(stderr: string, exitCode: number): SeselError {
  const match = stderr.match(/error:\s*([A-Za-z]+):\s*(.*)/);
  if (match) {
    const [, errorName, message] = match;
    return new SeselError(errorName, message.trim(), EXIT_CODES[errorName] ?? exitCode);
  }
  return new SeselError("SeselError", stderr.trim() || `exit code ${exitCode}`, exitCode);
}
