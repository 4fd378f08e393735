#!/usr/bin/env python3
"""Check which wfsem modules have a test file covering them."""

from pathlib import Path

# Test file stem -> modules it exercises, for tests not named after one module
SHARED_TESTS = {
    "parser": ["workflow/parser", "workflow/writer", "workflow/structures"],
    "pruner": ["workflow/pruner"],
    "relevance": ["relevance", "text", "workflow/entries"],
    "ontology": ["ontology/store", "ontology/loaders"],
    "harvest": ["harvest/fetcher", "harvest/harvester", "harvest/model",
                "harvest/registries", "harvest/wsdl"],
    "exporters": ["exporters/opmw", "exporters/tables"],
    "workspace": ["workspace", "parallel"],
    "main": ["main", "stages", "log"],
}

package_dir = Path("wfsem")
modules = set()
for file in package_dir.glob("**/*.py"):
    if "__pycache__" not in str(file) and file.name not in ("__init__.py", "__main__.py"):
        modules.add(str(file.relative_to(package_dir).with_suffix("")))

test_dir = Path("tests")
covered = {}
for test_file in sorted(test_dir.glob("test_*.py")):
    name = test_file.stem.replace("test_", "")
    for module in SHARED_TESTS.get(name, [name]):
        covered.setdefault(module, []).append(test_file.stem)

print("=== TEST COVERAGE ANALYSIS ===\n")

print("Modules with tests:")
for module in sorted(m for m in modules if m in covered):
    print(f"  - {module} ({', '.join(covered[module])})")

print("\nModules WITHOUT tests:")
for module in sorted(modules - set(covered)):
    print(f"  - {module}")

print(f"\nCoverage: {len(modules & set(covered))}/{len(modules)} modules tested")

print("\n=== FUNCTIONALITY TESTED ===")
for test_file in sorted(test_dir.glob("test_*.py")):
    functions = []
    with open(test_file) as f:
        for line in f:
            if "def test_" in line:
                functions.append(line.strip().split("def test_")[1].split("(")[0])
    print(f"\n{test_file.stem}: {len(functions)} tests")
    for func in functions:
        print(f"  - {func}")
