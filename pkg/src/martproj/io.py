"""Deterministic CSV/JSON emission.

Output bytes are a function of (rows, config) only: floats are printed
with 17 significant digits, line endings are LF, JSON keys are sorted and
the resolved run configuration is echoed into every artifact.
"""

import json

__all__ = ["format_float", "emit_csv", "emit_json", "emit"]


def format_float(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".17g")


def _cell(value) -> str:
    if isinstance(value, str):
        return value
    return format_float(value)


def emit_csv(rows, header, config: dict | None = None, footer: dict | None = None) -> str:
    """CSV text: optional ``# config:`` echo, header row, data rows, and an
    optional ``# fit:`` footer."""
    lines = []
    if config is not None:
        echo = " ".join(f"{k}={config[k]}" for k in sorted(config))
        lines.append(f"# config: {echo}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_cell(row[h]) for h in header))
    if footer is not None:
        body = " ".join(f"{k}={format_float(v) if not isinstance(v, str) else v}"
                        for k, v in footer.items())
        lines.append(f"# fit: {body}")
    return "\n".join(lines) + "\n"


def emit_json(rows, config: dict | None = None, extra: dict | None = None) -> str:
    payload = {"config": config or {}, "rows": rows}
    if extra:
        payload.update(extra)
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def emit(rows, header, fmt: str, path, config=None, footer=None, extra=None):
    """Write rows to ``path`` in the requested format ('csv' or 'json')."""
    if fmt == "csv":
        text = emit_csv(rows, header, config=config, footer=footer)
    elif fmt == "json":
        if footer is not None:
            extra = dict(extra or {})
            extra.setdefault("fit", footer)
        text = emit_json(rows, config=config, extra=extra)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return text
