"""quenchfigs: render figures from sptquench CSV outputs.

Seven figure kinds mirror the simulation experiments: es_fan, gap_bound,
velocity_scan, flatband, cocycle, disorder, mbl.  Each is driven by a JSON
figure spec naming the input CSVs and the output image; see
``quenchfigs render --spec PATH``.
"""

__version__ = "0.1.0"

from .csvio import EmptyData, MissingColumn, read_csv  # noqa: F401
from .figures import FIGURE_KINDS, render  # noqa: F401
