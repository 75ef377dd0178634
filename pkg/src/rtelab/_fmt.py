"""Output formatting shared by the export paths.

All file outputs print doubles with 17 significant digits so that values
round-trip exactly and repeated runs are byte-identical.
"""

import numpy as np


def fmt(x):
    """Format one double with 17 significant digits."""
    v = float(x)
    if not np.isfinite(v):
        raise ValueError(f"non-finite value in output: {v}")
    return format(v, ".17g")


def _emit(obj):
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj)
    if isinstance(obj, str):
        out = obj.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{out}"'
    if isinstance(obj, dict):
        items = ", ".join(f'{_emit(str(k))}: {_emit(v)}' for k, v in obj.items())
        return "{" + items + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_emit(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def dump_json(obj, path):
    """Write obj as JSON with 17-significant-digit doubles, LF line ending."""
    with open(path, "w", newline="\n") as f:
        f.write(_emit(obj))
        f.write("\n")


def write_csv(path, header, rows):
    """Write a CSV file: header row, LF endings, 17-significant-digit doubles.

    Row cells may be int, float, str or None (emitted as an empty field).
    """
    with open(path, "w", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            cells = []
            for cell in row:
                if cell is None:
                    cells.append("")
                elif isinstance(cell, (int, np.integer)):
                    cells.append(str(int(cell)))
                elif isinstance(cell, (float, np.floating)):
                    cells.append(fmt(cell))
                else:
                    cells.append(str(cell))
            f.write(",".join(cells) + "\n")
