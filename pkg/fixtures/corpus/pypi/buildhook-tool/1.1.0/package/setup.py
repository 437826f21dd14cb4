import subprocess

from setuptools import setup
from setuptools.command.build_py import build_py


class BuildWithStamp(build_py):
    def run(self):
        subprocess.run(["./scripts/stamp-build.sh"], check=False)
        build_py.run(self)


setup(
    name="buildhook-tool",
    version="1.1.0",
    packages=["buildhook_tool"],
    cmdclass={"build_py": BuildWithStamp},
)
