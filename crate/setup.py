"""Builds the `horocorr._native` extension by delegating to cargo.

The extension is a PyO3 cdylib (crates/horocorr-py); this shim compiles it in
release mode and copies the shared library to wherever setuptools expects the
module, so `pip install -e . --no-build-isolation` works without a dedicated
Rust build backend.
"""

import shutil
import subprocess
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

ROOT = Path(__file__).resolve().parent


class CargoExtension(Extension):
    def __init__(self, name: str):
        super().__init__(name, sources=[])


class CargoBuildExt(build_ext):
    def build_extension(self, ext: Extension) -> None:
        subprocess.run(
            [
                "cargo",
                "build",
                "--release",
                "-p",
                "horocorr-py",
                "--features",
                "extension-module",
            ],
            check=True,
            cwd=ROOT,
        )
        built = ROOT / "target" / "release" / "libhorocorr_native.so"
        target = Path(self.get_ext_fullpath(ext.name))
        target.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(built, target)


setup(
    ext_modules=[CargoExtension("horocorr._native")],
    cmdclass={"build_ext": CargoBuildExt},
)
