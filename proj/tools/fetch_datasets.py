#!/usr/bin/env python3
# Copyright 2026 The Mklaren Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Write the boston and diabetes benchmark tables as CSV files.

diabetes comes from scikit-learn's bundled copy. boston comes from the
MASS::Boston table shipped with the pydataset package. Existing files are left
alone unless --force is given.
"""

import argparse
import contextlib
import io
import os
import sys


def write_diabetes(path):
    from sklearn.datasets import load_diabetes

    frame = load_diabetes(as_frame=True, scaled=False).frame
    frame.to_csv(path, index=False)


def write_boston(path):
    with contextlib.redirect_stdout(io.StringIO()):
        from pydataset import data

        frame = data("Boston")
    frame.to_csv(path, index=False)


WRITERS = {"diabetes": write_diabetes, "boston": write_boston}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=os.environ.get("MKLAREN_DATA_DIR", "data"))
    parser.add_argument("--force", action="store_true")
    parser.add_argument("names", nargs="*", default=sorted(WRITERS))
    args = parser.parse_args()

    os.makedirs(args.out, exist_ok=True)
    failed = []
    for name in args.names:
        if name not in WRITERS:
            parser.error(f"unknown dataset {name!r}")
        path = os.path.join(args.out, f"{name}.csv")
        if os.path.exists(path) and not args.force:
            print(f"{path}: present")
            continue
        try:
            WRITERS[name](path)
            print(f"{path}: written")
        except ImportError as exc:
            failed.append(name)
            print(f"{name}: cannot load ({exc})", file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
