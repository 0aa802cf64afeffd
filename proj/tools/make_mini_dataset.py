#!/usr/bin/env python3
# Copyright 2026 The dyntemp Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Builds data/mini_dataset.jsonl from data/corpus.txt.

Every 7th sentence with at least 8 words becomes one continuation instance:
the first 4 words are the input, the rest of the sentence is the reference.
"""

import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent
PROMPT_WORDS = 4
STRIDE = 7
COUNT = 100


def main() -> None:
    lines = [l.strip() for l in (ROOT / "data" / "corpus.txt").read_text().splitlines() if l.strip()]
    records = []
    for index in range(0, len(lines), STRIDE):
        words = lines[index].split()
        if len(words) < 8:
            continue
        records.append({
            "id": f"inst-{len(records):03d}",
            "input": " ".join(words[:PROMPT_WORDS]),
            "reference": " ".join(words[PROMPT_WORDS:]),
        })
        if len(records) == COUNT:
            break
    if len(records) != COUNT:
        raise SystemExit(f"only {len(records)} instances available")
    with open(ROOT / "data" / "mini_dataset.jsonl", "w") as out:
        for record in records:
            out.write(json.dumps(record) + "\n")


if __name__ == "__main__":
    main()
