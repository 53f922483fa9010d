"""
Forms for pipeline configs and mask command flags.

One form per config block. Optional fields fall back to DEFAULTS after
cleaning, so a cleaned block is the complete, normalized record that
gets written back into reports.
"""

from django import forms

from masks.specs import SPP_PROFILES
from propagation.services import AXES, METHODS

ENCODINGS = ('continuous', 'phase', 'amplitude')
BINARY_ENCODINGS = ('phase', 'amplitude')
SOURCE_KINDS = ('gaussian', 'laguerre_gaussian')
REGIONS = ('all', 'annulus', 'order')


def _choices(values):
    return [(value, value) for value in values]


class BlockForm(forms.Form):
    """Form whose unset optional fields are filled from DEFAULTS."""

    DEFAULTS = {}

    def clean(self):
        cleaned_data = super().clean()
        for name, value in self.DEFAULTS.items():
            if cleaned_data.get(name) in (None, ''):
                cleaned_data[name] = value
        return cleaned_data


class GridForm(BlockForm):
    nx = forms.IntegerField(min_value=16)
    ny = forms.IntegerField(min_value=16, required=False)
    dx = forms.FloatField(min_value=0, help_text='Pixel pitch along x in meters')
    dy = forms.FloatField(min_value=0, required=False, help_text='Defaults to dx')
    wavelength = forms.FloatField(min_value=0, help_text='Vacuum wavelength in meters')

    def clean(self):
        cleaned_data = super().clean()
        for axis in ('x', 'y'):
            n = f'n{axis}'
            if cleaned_data.get(n) is not None and cleaned_data[n] % 2:
                self.add_error(n, 'Grid size must be even.')
        if cleaned_data.get('ny') is None:
            cleaned_data['ny'] = cleaned_data.get('nx')
        if cleaned_data.get('dy') is None:
            cleaned_data['dy'] = cleaned_data.get('dx')
        for name in ('dx', 'dy', 'wavelength'):
            if cleaned_data.get(name) == 0:
                self.add_error(name, 'Must be positive.')
        return cleaned_data


class SourceForm(BlockForm):
    DEFAULTS = {'kind': 'gaussian', 'e0': 1.0, 'ell': 0}

    kind = forms.ChoiceField(choices=_choices(SOURCE_KINDS), required=False)
    w0 = forms.FloatField(min_value=0, help_text='1/e field radius in meters')
    e0 = forms.FloatField(min_value=0, required=False)
    ell = forms.IntegerField(required=False, help_text='Charge of a laguerre_gaussian source')


# ---------------------------------------------------------------------------
# Elements
# ---------------------------------------------------------------------------

class ForkElementForm(BlockForm):
    DEFAULTS = {'alpha': 1.0, 'threshold': 0.5, 'encoding': 'phase'}

    m = forms.IntegerField()
    period = forms.FloatField(min_value=0)
    alpha = forms.FloatField(required=False)
    threshold = forms.FloatField(required=False)
    encoding = forms.ChoiceField(choices=_choices(ENCODINGS), required=False)


class SPPElementForm(BlockForm):
    DEFAULTS = {'n_medium': 1.0, 'h0': 0.0, 'profile': 'stepped'}

    ell = forms.IntegerField()
    sectors = forms.IntegerField(min_value=1)
    n_plate = forms.FloatField()
    n_medium = forms.FloatField(required=False)
    h0 = forms.FloatField(required=False)
    aperture_d = forms.FloatField(min_value=0)
    profile = forms.ChoiceField(choices=_choices(SPP_PROFILES), required=False)
    wavelength = forms.FloatField(
        min_value=0, required=False, help_text='Design wavelength, defaults to the grid wavelength'
    )


class AxiconElementForm(BlockForm):
    DEFAULTS = {'encoding': 'phase'}

    m = forms.IntegerField()
    period = forms.FloatField(min_value=0)
    aperture_d = forms.FloatField(min_value=0)
    encoding = forms.ChoiceField(choices=_choices(BINARY_ENCODINGS), required=False)


class LensElementForm(BlockForm):
    focal_length = forms.FloatField()


class CylindricalLensElementForm(BlockForm):
    DEFAULTS = {'axis': 'x'}

    focal_length = forms.FloatField()
    axis = forms.ChoiceField(choices=_choices(AXES), required=False)


class PropagateElementForm(BlockForm):
    DEFAULTS = {'method': 'paraxial'}

    z = forms.FloatField()
    method = forms.ChoiceField(choices=_choices(METHODS), required=False)
    band_limit = forms.NullBooleanField(required=False)


class ApodizationElementForm(BlockForm):
    DEFAULTS = {'p_out': 2.0, 'q_in': 2.0}

    r0 = forms.FloatField(min_value=0)
    rc = forms.FloatField(min_value=0)
    p_out = forms.FloatField(min_value=1, required=False)
    q_in = forms.FloatField(min_value=1, required=False)


class ApertureElementForm(BlockForm):
    diameter = forms.FloatField(min_value=0)


class ModeConvertElementForm(BlockForm):
    DEFAULTS = {'axis': 'x', 'defocus': 0.0, 'method': 'paraxial'}

    f_cyl = forms.FloatField(min_value=0)
    axis = forms.ChoiceField(choices=_choices(AXES), required=False)
    defocus = forms.FloatField(required=False)
    method = forms.ChoiceField(choices=_choices(METHODS), required=False)
    band_limit = forms.NullBooleanField(required=False)


ELEMENT_FORMS = {
    'fork': ForkElementForm,
    'spp': SPPElementForm,
    'axicon': AxiconElementForm,
    'lens': LensElementForm,
    'cylindrical_lens': CylindricalLensElementForm,
    'propagate': PropagateElementForm,
    'apodization': ApodizationElementForm,
    'aperture': ApertureElementForm,
    'mode_convert': ModeConvertElementForm,
}


# ---------------------------------------------------------------------------
# Analyses
# ---------------------------------------------------------------------------

class ExtractForm(BlockForm):
    """Diffraction-order window applied before an analysis."""

    order = forms.IntegerField()
    period = forms.FloatField()
    focal_length = forms.FloatField()
    half_width = forms.FloatField(min_value=0, required=False)

    def clean(self):
        cleaned_data = super().clean()
        for name in ('period', 'focal_length'):
            if cleaned_data.get(name) == 0:
                self.add_error(name, 'Must be nonzero.')
        return cleaned_data


class SpectrumForm(BlockForm):
    ell_min = forms.IntegerField()
    ell_max = forms.IntegerField()
    n_theta = forms.IntegerField(min_value=8, required=False)

    def clean(self):
        cleaned_data = super().clean()
        ell_min, ell_max = cleaned_data.get('ell_min'), cleaned_data.get('ell_max')
        if ell_min is not None and ell_max is not None and ell_min > ell_max:
            self.add_error('ell_max', 'Must not be smaller than ell_min.')
        return cleaned_data


class ProfileForm(BlockForm):
    n_bins = forms.IntegerField(min_value=8, required=False)


class LobesForm(BlockForm):
    DEFAULTS = {'n_samples': 720}

    prominence = forms.FloatField(min_value=0, max_value=1, required=False)
    n_samples = forms.IntegerField(min_value=16, required=False)


class FringesForm(BlockForm):
    threshold = forms.FloatField(min_value=0, max_value=1, required=False)


class OrdersForm(BlockForm):
    DEFAULTS = {'order_min': -2, 'order_max': 2}

    order_min = forms.IntegerField(required=False)
    order_max = forms.IntegerField(required=False)
    period = forms.FloatField()
    focal_length = forms.FloatField()
    half_width = forms.FloatField(min_value=0, required=False)
    m = forms.IntegerField(required=False, help_text='Grating charge, adds expected charges to the table')

    def clean(self):
        cleaned_data = super().clean()
        if cleaned_data.get('order_min', 0) > cleaned_data.get('order_max', 0):
            self.add_error('order_max', 'Must not be smaller than order_min.')
        for name in ('period', 'focal_length'):
            if cleaned_data.get(name) == 0:
                self.add_error(name, 'Must be nonzero.')
        return cleaned_data


class EfficiencyForm(BlockForm):
    DEFAULTS = {'region': 'all'}

    region = forms.ChoiceField(choices=_choices(REGIONS), required=False)
    r_in = forms.FloatField(min_value=0, required=False)
    r_out = forms.FloatField(min_value=0, required=False)

    def clean(self):
        cleaned_data = super().clean()
        if cleaned_data.get('region') == 'annulus':
            for name in ('r_in', 'r_out'):
                if cleaned_data.get(name) is None:
                    self.add_error(name, 'Required for an annulus region.')
        return cleaned_data


class WidthForm(BlockForm):
    pass


ANALYSIS_FORMS = {
    'spectrum': SpectrumForm,
    'profile': ProfileForm,
    'lobes': LobesForm,
    'fringes': FringesForm,
    'orders': OrdersForm,
    'efficiency': EfficiencyForm,
    'width': WidthForm,
}

# Analyses that may first cut one diffraction order out of the field
EXTRACTABLE = ('spectrum', 'profile', 'lobes', 'efficiency')


class OutputForm(BlockForm):
    DEFAULTS = {'name': 'run', 'intensity': True, 'raw_field': False, 'csv': True}

    name = forms.SlugField(required=False)
    intensity = forms.NullBooleanField(required=False)
    raw_field = forms.NullBooleanField(required=False)
    csv = forms.NullBooleanField(required=False)


# ---------------------------------------------------------------------------
# mask command flags
# ---------------------------------------------------------------------------

class MaskForkForm(ForkElementForm):
    pass


class MaskSPPForm(SPPElementForm):
    aperture_d = forms.FloatField(min_value=0, required=False, help_text='Defaults to the grid window')


class MaskAxiconForm(AxiconElementForm):
    n_plate = forms.FloatField(required=False, help_text='Index for the pi-step etch depth')


MASK_FORMS = {
    'fork': MaskForkForm,
    'spp': MaskSPPForm,
    'axicon': MaskAxiconForm,
}
