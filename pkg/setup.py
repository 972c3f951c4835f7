"""Build hook that compiles the Rust pairing backend with cargo.

The extension module has no Python sources; cargo produces a cdylib and the
hook copies it to the location setuptools expects.
"""

import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import setup
from setuptools.command.build_ext import build_ext
from setuptools.extension import Extension


class CargoExtension(Extension):
    def __init__(self, name: str, crate_dir: str):
        super().__init__(name, sources=[])
        self.crate_dir = crate_dir


class CargoBuildExt(build_ext):
    def build_extension(self, ext):
        if not isinstance(ext, CargoExtension):
            return super().build_extension(ext)
        crate = Path(__file__).parent.joinpath(ext.crate_dir).resolve()
        subprocess.run(["cargo", "build", "--release"], cwd=crate, check=True)
        release = crate / "target" / "release"
        for candidate in ("lib_backend.so", "lib_backend.dylib", "_backend.dll"):
            built = release / candidate
            if built.exists():
                break
        else:
            raise FileNotFoundError(f"cargo did not produce a cdylib in {release}")
        out = Path(self.get_ext_fullpath(ext.name))
        out.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(built, out)


setup(
    ext_modules=[CargoExtension("rfab._backend", "rust")],
    cmdclass={"build_ext": CargoBuildExt},
)
