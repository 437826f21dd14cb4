"""Build the ordered execution plan for tracing one package.

Installation always runs first since that is where hostile packages do
most of their work. Embedded executables get their own step only when
the file inventory actually contains some. Import comes next, and the
functional step drives exported callables with null arguments, walking
two levels deep so methods on returned objects get a chance to run.
"""

from __future__ import annotations

from dataclasses import dataclass

from pkgvet.model import FileKind, PackageMetadata, Registry


class RunMode:
    INSTALL = "INSTALL"
    EMBEDDED_BINARY = "EMBEDDED_BINARY"
    IMPORT = "IMPORT"
    FUNCTIONAL = "FUNCTIONAL"

    ORDER = (INSTALL, EMBEDDED_BINARY, IMPORT, FUNCTIONAL)


_INSTALL_COMMANDS = {
    Registry.NPM: ("npm", "install", "{name}@{version}"),
    Registry.PYPI: ("pip", "install", "{name}=={version}"),
    Registry.RUBYGEMS: ("gem", "install", "{name}", "-v", "{version}"),
}

_IMPORT_COMMANDS = {
    Registry.NPM: ("node", "-e", "require('{name}')"),
    Registry.PYPI: ("python3", "-c", "import {module}"),
    Registry.RUBYGEMS: ("ruby", "-e", "require '{name}'"),
}

_FUNCTIONAL_DEPTH = 2


@dataclass(frozen=True)
class RunStep:
    mode: str
    argv: tuple = ()
    targets: tuple = ()  # binaries to execute, or call specs to drive

    def to_dict(self) -> dict:
        return {"mode": self.mode, "argv": list(self.argv), "targets": list(self.targets)}


@dataclass(frozen=True)
class RunPlan:
    coordinate: str
    steps: tuple

    def modes(self) -> tuple:
        return tuple(s.mode for s in self.steps)

    def to_dict(self) -> dict:
        return {"coordinate": self.coordinate, "steps": [s.to_dict() for s in self.steps]}


def _fill(template, meta: PackageMetadata) -> tuple:
    module = meta.coordinate.name.replace("-", "_")
    return tuple(
        part.format(name=meta.coordinate.name, version=meta.coordinate.version, module=module)
        for part in template
    )


def _call_specs(export_names, depth=_FUNCTIONAL_DEPTH) -> tuple:
    """Null-argument invocation specs: each export called directly, and
    attributes of its result probed one more level."""
    specs = []
    for name in export_names:
        specs.append(f"{name}(null)")
        if depth >= 2:
            specs.append(f"{name}(null).*(null)")
    return tuple(specs)


def make_run_plan(meta: PackageMetadata, export_names=()) -> RunPlan:
    registry = meta.coordinate.registry
    steps = [RunStep(RunMode.INSTALL, argv=_fill(_INSTALL_COMMANDS[registry], meta))]
    executables = tuple(
        f.path for f in meta.file_inventory
        if f.kind in (FileKind.PE_BINARY, FileKind.ELF_BINARY)
    )
    if executables:
        steps.append(RunStep(RunMode.EMBEDDED_BINARY, targets=executables))
    steps.append(RunStep(RunMode.IMPORT, argv=_fill(_IMPORT_COMMANDS[registry], meta)))
    steps.append(RunStep(RunMode.FUNCTIONAL, targets=_call_specs(sorted(export_names))))
    assert [s.mode for s in steps] == [m for m in RunMode.ORDER if any(s.mode == m for s in steps)]
    return RunPlan(coordinate=meta.coordinate.key(), steps=tuple(steps))
