"""Figure rendering for exported reachability artifacts.

Consumes only the documented interchange formats (HJVF binary fields and
sweep CSVs); it never links against the package that produces them.
"""

from .hjvf import FieldFile, FieldFormatError, GridInfo, read_field_file
from .slices import SliceSpec, contour_vertices, extract_slice, plot_slice
from .sweeps import SweepRow, plot_sweep, read_sweep

__version__ = "0.1.0"
