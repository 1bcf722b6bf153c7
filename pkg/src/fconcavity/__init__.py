"""F-concavity laboratory: admissible transforms, grid certification and Dirichlet heat flow."""
from .concavity import ConcavityReport, check_f_concave, check_quasiconcave, slack
from .domains import Domain, interval_domain, polygon_domain, unit_square
from .extended import NEG_INF, POS_INF, ExtendedReal
from .fields import Field, read_field_csv, write_field_csv
from .transforms import (DomainError, Interval, Transform, admissibility_audit, f_mean, make_log_power,
                         make_power, make_power_star, make_scaled_half_log, parse_transform, power_mean)

__version__ = "0.1.0"
