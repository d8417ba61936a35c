#!/usr/bin/env python3
"""Regenerate tests/fixtures/golden from the sample assets.

Usage: tools/regen_golden.py [path/to/maims]
"""

import json
import pathlib
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parents[1]
GOLDEN = ROOT / "tests" / "fixtures" / "golden"


def main():
    binary = sys.argv[1] if len(sys.argv) > 1 else str(ROOT / "build" / "maims")
    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        config = {
            "scale": str(ROOT / "assets" / "sample_scale.json"),
            "corpus": str(ROOT / "assets" / "sample_corpus.jsonl"),
            "task": str(ROOT / "assets" / "sample_task.json"),
            "cache_dir": "",
            "output_dir": str(tmp / "out"),
            "workers": 4,
            "roles": {"default": {"backend": "mock", "script": str(ROOT / "assets" / "sample_mock_script.json")}},
        }
        (tmp / "config.json").write_text(json.dumps(config, indent=2))
        subprocess.run([binary, "run", "--config", str(tmp / "config.json"), "--out", str(tmp / "run")], check=True)

        GOLDEN.mkdir(parents=True, exist_ok=True)
        lines = []
        for line in (tmp / "run" / "traces.jsonl").read_text().splitlines():
            if line.strip():
                record = json.loads(line)
                record.pop("meta", None)
                lines.append(json.dumps(record, ensure_ascii=False))
        (GOLDEN / "traces.jsonl").write_text("\n".join(lines) + "\n")
        (GOLDEN / "report.json").write_bytes((tmp / "run" / "report.json").read_bytes())
    print(f"wrote {GOLDEN}")


if __name__ == "__main__":
    main()
