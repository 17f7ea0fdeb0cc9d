#!/usr/bin/env python3
"""
Schema Validator for contrakt input documents.

Validates matrix, graph, system and run-config documents against the JSON
schemas in utils/schema.
"""

import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

SCHEMA_NAMES = ('matrix', 'graph', 'system', 'run_config')

_TYPE_CHECKS = {
    'string': lambda v: isinstance(v, str),
    'integer': lambda v: isinstance(v, int) and not isinstance(v, bool),
    'number': lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
    'boolean': lambda v: isinstance(v, bool),
    'object': lambda v: isinstance(v, dict),
    'array': lambda v: isinstance(v, list),
    'null': lambda v: v is None,
}


class SchemaValidator:
    """Validates data against JSON schemas."""

    def __init__(self, schema_dir: Optional[str] = None):
        self.schema_dir = Path(schema_dir) if schema_dir else Path(__file__).parent / 'schema'
        self.schemas = self._load_schemas()

    def _load_schemas(self) -> Dict[str, Dict]:
        """Load all schemas."""
        schemas = {}
        for name in SCHEMA_NAMES:
            schema_file = self.schema_dir / f"{name}.json"
            with open(schema_file, 'r') as f:
                schemas[name] = json.load(f)
        return schemas

    def validate(self, data: Any, schema_name: str) -> Tuple[bool, List[str]]:
        """Validate data against a named schema."""
        if schema_name not in self.schemas:
            return False, [f"Unknown schema: {schema_name}"]
        errors: List[str] = []
        self._validate(data, self.schemas[schema_name], '$', errors)
        return len(errors) == 0, errors

    def validate_matrix(self, data: Any) -> Tuple[bool, List[str]]:
        return self.validate(data, 'matrix')

    def validate_graph(self, data: Any) -> Tuple[bool, List[str]]:
        return self.validate(data, 'graph')

    def validate_system(self, data: Any) -> Tuple[bool, List[str]]:
        return self.validate(data, 'system')

    def validate_run_config(self, data: Any) -> Tuple[bool, List[str]]:
        return self.validate(data, 'run_config')

    def _validate(self, data: Any, schema: Dict, path: str, errors: List[str]) -> None:
        """Recursive check of type, enum, required, properties and items."""
        if 'anyOf' in schema:
            for option in schema['anyOf']:
                trial: List[str] = []
                self._validate(data, option, path, trial)
                if not trial:
                    break
            else:
                errors.append(f"{path}: does not match any allowed form")
            return

        expected = schema.get('type')
        if expected is not None:
            types = expected if isinstance(expected, list) else [expected]
            if not any(_TYPE_CHECKS[t](data) for t in types):
                errors.append(f"{path}: should be {' or '.join(types)}, got {type(data).__name__}")
                return

        if 'enum' in schema and data not in schema['enum']:
            errors.append(f"{path}: value {data!r} not in allowed values: {schema['enum']}")

        if 'minimum' in schema and _TYPE_CHECKS['number'](data) and data < schema['minimum']:
            errors.append(f"{path}: {data} is below the minimum {schema['minimum']}")

        if isinstance(data, dict):
            for field in schema.get('required', []):
                if field not in data:
                    errors.append(f"{path}: missing required field '{field}'")
            properties = schema.get('properties', {})
            for key, value in data.items():
                if key in properties:
                    self._validate(value, properties[key], f"{path}.{key}", errors)
                elif schema.get('additionalProperties') is False:
                    errors.append(f"{path}: unknown key '{key}'")

        if isinstance(data, list) and 'items' in schema:
            if 'minItems' in schema and len(data) < schema['minItems']:
                errors.append(f"{path}: needs at least {schema['minItems']} items")
            for idx, item in enumerate(data):
                self._validate(item, schema['items'], f"{path}[{idx}]", errors)

    def validate_file(self, file_path: str, schema_name: str) -> Tuple[bool, List[str]]:
        """
        Validate a JSON file.

        Args:
            file_path: Path to JSON file
            schema_name: One of matrix, graph, system, run_config

        Returns:
            (is_valid, errors)
        """
        with open(file_path, 'r', encoding='utf-8') as f:
            data = json.load(f)
        return self.validate(data, schema_name)


def main():
    """Validate files given as <schema>:<path> arguments."""
    validator = SchemaValidator()
    status = 0
    for arg in sys.argv[1:]:
        schema_name, _, file_path = arg.partition(':')
        try:
            valid, errors = validator.validate_file(file_path, schema_name)
        except (OSError, json.JSONDecodeError) as e:
            print(f"❌ {file_path}: {e}")
            status = 2
            continue
        if valid:
            print(f"✅ {file_path}: valid {schema_name}")
        else:
            status = max(status, 1)
            print(f"❌ {file_path}:")
            for error in errors[:5]:
                print(f"   • {error}")
            if len(errors) > 5:
                print(f"   ... and {len(errors) - 5} more errors")
    return status


if __name__ == "__main__":
    sys.exit(main())
