"""
Pipeline config validation

Checks a parsed JSON config block by block and element by element,
collecting every problem before reporting. Errors are formatted as
'<path>: <message>', e.g. 'elements[2].z: This field is required.'
"""

import json
import logging
from pathlib import Path

from masks.specs import MaskError
from propagation.services import PropagationError
from wavefield.grid import FieldError, GridSpec

from .forms import (
    ANALYSIS_FORMS,
    ELEMENT_FORMS,
    EXTRACTABLE,
    ExtractForm,
    GridForm,
    OutputForm,
    SourceForm,
)

logger = logging.getLogger(__name__)


class ConfigError(Exception):
    """Custom exception for invalid pipeline configs; carries every problem found"""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__('\n'.join(self.errors))


TOP_LEVEL_KEYS = ('grid', 'source', 'elements', 'analysis', 'output')


def form_errors(form, prefix):
    """Flatten a bound form's errors into '<prefix>.<field>: <message>' lines."""
    lines = []
    for name, messages in form.errors.items():
        path = prefix if name == '__all__' else f"{prefix}.{name}"
        lines.extend(f"{path}: {message}" for message in messages)
    return lines


class ConfigValidator:
    """
    Validates pipeline configs for `run`.

    Performs validation of:
    - Top-level structure and unknown keys
    - Grid, source and output blocks
    - Each element against its kind's form and parameter record
    - Each analysis, including an optional order-extraction block
    """

    def __init__(self):
        self.errors = []
        self.data = {}

    def validate(self, config):
        """
        Validate a parsed config.

        Args:
            config: dict loaded from a JSON config

        Returns:
            dict: {'valid': bool, 'data': normalized config, 'errors': list}
        """
        self.errors = []
        self.data = {}

        if not isinstance(config, dict):
            self.errors.append(f"config: expected a JSON object (got {type(config).__name__})")
            return self._result()

        for key in sorted(set(config) - set(TOP_LEVEL_KEYS)):
            self.errors.append(f"{key}: Unknown key.")
        for key in ('grid', 'source', 'elements'):
            if key not in config:
                self.errors.append(f"{key}: This field is required.")

        grid = self._validate_block(config.get('grid'), GridForm, 'grid') if 'grid' in config else None
        source = self._validate_block(config.get('source'), SourceForm, 'source') if 'source' in config else None
        elements = self._validate_elements(config.get('elements'), grid) if 'elements' in config else None
        analyses = self._validate_analyses(config.get('analysis', []))
        output = self._validate_block(config.get('output', {}), OutputForm, 'output')

        if not self.errors:
            self.data = {
                'grid': grid,
                'source': source,
                'elements': elements,
                'analysis': analyses,
                'output': output,
            }
        return self._result()

    def validate_file(self, path):
        """Read a JSON config from disk and validate it."""
        self.errors = []
        try:
            config = json.loads(Path(path).read_text(encoding='utf-8'))
        except OSError as e:
            self.errors.append(f"{path}: cannot read config ({e})")
            return self._result()
        except ValueError as e:
            self.errors.append(f"{path}: invalid JSON ({e})")
            return self._result()
        return self.validate(config)

    def _result(self):
        valid = not self.errors
        if not valid:
            logger.warning(f"Config rejected with {len(self.errors)} error(s)")
        return {'valid': valid, 'data': self.data if valid else {}, 'errors': list(self.errors)}

    def _validate_block(self, block, form_class, path, extra_keys=()):
        """Validate one dict against a form; returns the cleaned data or None."""
        if not isinstance(block, dict):
            self.errors.append(f"{path}: expected an object")
            return None
        allowed = set(form_class.base_fields) | set(extra_keys)
        unknown = sorted(set(block) - allowed)
        for key in unknown:
            self.errors.append(f"{path}.{key}: Unknown key.")

        form = form_class(data={k: v for k, v in block.items() if k in form_class.base_fields})
        if not form.is_valid():
            self.errors.extend(form_errors(form, path))
            return None
        if unknown:
            return None
        return dict(form.cleaned_data)

    def _validate_kind(self, entry, forms_by_kind, path):
        if not isinstance(entry, dict):
            self.errors.append(f"{path}: expected an object")
            return None, None
        kind = entry.get('kind')
        if kind not in forms_by_kind:
            self.errors.append(
                f"{path}.kind: Unknown kind {kind!r}; expected one of {', '.join(forms_by_kind)}."
            )
            return None, None
        return kind, forms_by_kind[kind]

    def _validate_elements(self, elements, grid):
        if not isinstance(elements, list):
            self.errors.append("elements: expected a list")
            return None
        if not elements:
            self.errors.append("elements: At least one element is required.")
            return None

        grid_spec = None
        if grid is not None:
            try:
                grid_spec = GridSpec(**grid)
            except FieldError as e:
                self.errors.append(f"grid: {e}")

        cleaned = []
        for i, entry in enumerate(elements):
            path = f"elements[{i}]"
            kind, form_class = self._validate_kind(entry, ELEMENT_FORMS, path)
            if kind is None:
                continue
            params = self._validate_block(entry, form_class, path, extra_keys=('kind',))
            if params is None:
                continue
            element = {'kind': kind, **params}
            if grid_spec is not None:
                self._check_element(element, grid_spec, path)
            cleaned.append(element)
        return cleaned

    def _check_element(self, element, grid, path):
        """Build the element's parameter record so its own invariants run now."""
        from .services import element_spec

        try:
            element_spec(element, grid)
        except (MaskError, PropagationError, FieldError) as e:
            self.errors.append(f"{path}: {e}")

    def _validate_analyses(self, analyses):
        if not isinstance(analyses, list):
            self.errors.append("analysis: expected a list")
            return None

        cleaned = []
        for i, entry in enumerate(analyses):
            path = f"analysis[{i}]"
            kind, form_class = self._validate_kind(entry, ANALYSIS_FORMS, path)
            if kind is None:
                continue
            extra = ('kind', 'extract') if kind in EXTRACTABLE else ('kind',)
            params = self._validate_block(entry, form_class, path, extra_keys=extra)

            extract = None
            if entry.get('extract') is not None and kind in EXTRACTABLE:
                extract = self._validate_block(entry['extract'], ExtractForm, f"{path}.extract")
                if extract is None:
                    continue
            if kind == 'efficiency' and params is not None:
                if params['region'] == 'order' and extract is None:
                    self.errors.append(f"{path}.extract: Required for an order region.")
                    continue
            if params is None:
                continue
            cleaned.append({'kind': kind, **params, 'extract': extract} if kind in EXTRACTABLE
                           else {'kind': kind, **params})
        return cleaned
