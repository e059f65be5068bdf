"""Builds the dicke6py extension by delegating to cargo.

The compiled cdylib is copied to wherever setuptools expects the extension,
so both regular and editable installs work without further tooling.
"""

import shutil
import subprocess
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

CRATE_DIR = Path(__file__).resolve().parent
WORKSPACE = CRATE_DIR.parent.parent


class CargoBuild(build_ext):
    def build_extension(self, ext):
        subprocess.run(
            ["cargo", "build", "--release", "--package", "dicke6-py"],
            cwd=WORKSPACE,
            check=True,
        )
        release = WORKSPACE / "target" / "release"
        built = next(
            path
            for name in ("libdicke6py.so", "libdicke6py.dylib", "dicke6py.dll")
            if (path := release / name).exists()
        )
        target = Path(self.get_ext_fullpath(ext.name))
        target.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(built, target)


setup(
    ext_modules=[Extension("dicke6py", sources=[])],
    cmdclass={"build_ext": CargoBuild},
)
