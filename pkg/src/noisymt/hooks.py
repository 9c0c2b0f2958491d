"""Wrappers for external line-oriented hook executables.

All hooks share one contract: lines on standard input, exactly one output
line per input line on standard output, nonzero exit status means
failure.  Back-translators additionally receive the sampling temperature
and seed as trailing arguments (see :func:`corpusbuild.executable_hook`).
"""

import subprocess

from .errors import HookFailure


def run_lines(argv, lines) -> list:
    """Run an executable over a batch of lines and return its output lines."""
    lines = list(lines)
    proc = subprocess.run(argv, input='\n'.join(lines) + ('\n' if lines else ''),
                          capture_output=True, text=True)
    if proc.returncode != 0:
        raise HookFailure(
            f'hook {argv[0]} exited with {proc.returncode}: '
            f'{proc.stderr.strip()[:200]}')
    out = proc.stdout.splitlines()
    if len(out) != len(lines):
        raise HookFailure(
            f'hook {argv[0]} returned {len(out)} lines for {len(lines)} inputs')
    return out


def classifier_hook(argv):
    """Adapt a line-in/language-code-out executable to the classifier
    interface used by the LID filter (called once per line)."""
    def classify(line: str):
        out = run_lines(argv, [line])
        code = out[0].strip()
        return code or None
    return classify
