"""
Plain-text reports for the command-line front end.

Reports are jinja2 templates rendered from the JSON-ready dictionaries the
experiments return. Templates are compiled once and kept in a class-level
cache shared by all renderer instances.
"""

import logging
from typing import Any, Dict

from jinja2 import BaseLoader, Environment, StrictUndefined
from jinja2 import TemplateError as JinjaTemplateError

from .exceptions import TemplateError

logger = logging.getLogger(__name__)


_TEMPLATE_SOURCES: Dict[str, str] = {
    "families": (
        "Available families:\n"
        "{% for name, info in families | dictsort %}"
        "  {{ '%-18s' | format(name) }} {{ info.description }}"
        "{% if info.params %} [{{ info.params | join(', ') }}]{% endif %}\n"
        "{% endfor %}"
    ),
    "certificate": (
        "Soliton audit: {{ source }}\n"
        "  dim                {{ dim }}\n"
        "  jacobi residual    {{ '%.3e' | format(jacobi_residual) }}\n"
        "  verdict            {{ certificate.verdict }} ({{ certificate.kind }})\n"
        "  lambda             {{ '%.12g' | format(certificate['lambda']) }}\n"
        "  residual           {{ '%.3e' | format(certificate.residual) }} (tol {{ certificate.tol }})\n"
        "  D* is derivation   {{ certificate.D_star_is_derivation }}"
        " (residual {{ '%.3e' | format(certificate.D_star_residual) }})\n"
        "{% if perfectness %}"
        "  perfect            {{ perfectness.perfect }}"
        " (derived rank {{ perfectness.derived_rank }}/{{ perfectness.dim }})\n"
        "{% endif %}"
    ),
    "sln-instability": (
        "sl({{ n + 1 }}) instability from (y, z) = ({{ initial.y0 }}, {{ initial.z0 }})\n"
        "  stays in D                {{ region.persistent }}\n"
        "  reached origin            {{ converged_to_origin }} at t = {{ '%.6g' | format(final_time) }}\n"
        "  z^2/y at y < {{ ratio.level }}    {{ ratio.at_level }} (target {{ '%.10g' | format(ratio.target) }},"
        " error {{ '%.3e' | format(ratio.error_at_level) }})\n"
        "  T_est                     {{ blowup.lower }} <= {{ '%.10g' | format(blowup.upper) }}: {{ blowup.bound_holds }}\n"
        "  x (T - t) window          [{{ x_times_remaining.min }}, {{ x_times_remaining.max }}]"
        " (limit {{ '%.6g' | format(x_times_remaining.expected_limit) }})\n"
        "  y' <= 0 inside D          {{ monotonicity.holds }} (max {{ monotonicity.max_ydot }}"
        " over {{ monotonicity.samples_in_D }} samples)\n"
        "  distance to mu_infinity   {{ '%.3e' | format(limit_bracket.last_distance) }}\n"
    ),
    "homothety": (
        "Homothety distinction (threshold {{ threshold }})\n"
        "{% for name, d in distances | dictsort %}"
        "  nu_0 vs {{ '%-12s' | format(name) }} full {{ '%.4f' | format(d.full) }}"
        "  block {{ '%.4f' | format(d.block) }}"
        "  {{ 'not homothetic' if d.not_homothetic else 'INCONCLUSIVE' }}\n"
        "{% endfor %}"
        "Recorded trace/det values (printed vs computed):\n"
        "{% for row in recorded_values %}"
        "  {{ row.bracket }}: tr {{ row.printed_trace }} vs {{ '%.6g' | format(row.oracle_trace) }},"
        " det {{ row.printed_det }} vs {{ '%.6g' | format(row.oracle_det) }}"
        "{% if row.discrepancy %}  (differs){% endif %}\n"
        "{% endfor %}"
    ),
    "orbit-drift": (
        "Orbit drift from (a0, b0) = ({{ a0 }}, {{ b0 }})\n"
        "  b: {{ '%.6g' | format(b_initial) }} -> {{ '%.6g' | format(b_final) }}"
        " by t = {{ '%.6g' | format(final_time) }}\n"
        "  alpha^2 b^2 / (1 - b^4) drift {{ orbit_law.invariant_drift }}, b monotone {{ orbit_law.b_monotone }}\n"
        "  b(tau) closed-form residual {{ orbit_law.closed_form_residual }} up to tau = {{ orbit_law.tau_final }}\n"
        "{% for name, d in distances | dictsort %}"
        "  {{ '%-12s' | format(name) }} {{ '%.4e' | format(d.initial) }} -> {{ '%.4e' | format(d.final) }}\n"
        "{% endfor %}"
        "  closest at the end: {{ closest_final }}\n"
    ),
    "flow": (
        "{{ title }}\n"
        "  final time   {{ '%.10g' | format(final_time) }}\n"
        "{% for event in events %}"
        "  event        {{ event.kind }} at t = {{ '%.10g' | format(event.time) }}"
        "{% if event.t_est is not none %} (T_est {{ '%.10g' | format(event.t_est) }}){% endif %}\n"
        "{% endfor %}"
    ),
    "acceptance": (
        "Acceptance (seed {{ seed }}{% if tol_override %}, tol {{ tol_override }}{% endif %})\n"
        "{% for c in criteria %}"
        "  [{{ 'PASS' if c.passed else 'FAIL' }}] {{ '%2d' | format(c.number) }} {{ '%-26s' | format(c.name) }}"
        "{% if c.measured is not none %} measured {{ '%.3e' | format(c.measured) }}{% endif %}"
        "{% if c.threshold is not none %} threshold {{ '%.3e' | format(c.threshold) }}{% endif %}"
        " ({{ c.seconds }}s)\n"
        "{% endfor %}"
        "{{ 'ALL PASSED' if passed else 'FAILED: ' ~ (failed | join(', ')) }}\n"
    ),
}


class ReportRenderer:
    """
    Renders experiment reports as plain text.

    Uses class-level caching so templates are compiled only once.
    """

    _template_cache: Dict[str, Any] = {}
    _cache_initialized: bool = False

    def __init__(self) -> None:
        if not self._cache_initialized:
            self._initialize_template_cache()

    @classmethod
    def _initialize_template_cache(cls) -> None:
        """Compile all templates into the class-level cache."""
        if not cls._cache_initialized:
            env = Environment(loader=BaseLoader(), undefined=StrictUndefined, keep_trailing_newline=True)
            cls._template_cache.update(
                {name: env.from_string(source) for name, source in _TEMPLATE_SOURCES.items()}
            )
            cls._cache_initialized = True
            logger.debug(f"Compiled {len(cls._template_cache)} report templates")

    @property
    def available(self) -> list:
        return sorted(self._template_cache)

    def render(self, template_name: str, **kwargs: Any) -> str:
        """
        Render a named report.

        Args:
            template_name: Name of the template to use
            **kwargs: Template variables to render

        Returns:
            str: Rendered report

        Raises:
            TemplateError: If the template is unknown or rendering fails
        """
        template = self._template_cache.get(template_name)
        if template is None:
            raise TemplateError(
                f"Unknown template: {template_name}. Available templates: {self.available}",
                template_name=template_name
            )
        try:
            return template.render(**kwargs)
        except JinjaTemplateError as e:
            logger.error(f"Error rendering report '{template_name}': {str(e)}")
            raise TemplateError(
                f"Failed to render report '{template_name}': {str(e)}",
                template_name=template_name,
                template_variables=kwargs
            )
