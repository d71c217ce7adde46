#!/usr/bin/env python3
"""Regenerate the bundled demonstration study under demo/store.

The build is fully deterministic; rerunning it reproduces the committed
store byte for byte.
"""

import argparse
import shutil
from pathlib import Path

from pelab.demo import PROJECT_ID, build_demo_project


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--store", default="demo/store", help="target store directory")
    parser.add_argument("--force", action="store_true", help="replace an existing store")
    args = parser.parse_args()
    target = Path(args.store)
    project_dir = target / "projects" / PROJECT_ID
    if project_dir.exists():
        if not args.force:
            raise SystemExit(f"{project_dir} exists; pass --force to rebuild")
        shutil.rmtree(project_dir)
    build_demo_project(target)
    print(f"demo project '{PROJECT_ID}' written to {target}")


if __name__ == "__main__":
    main()
