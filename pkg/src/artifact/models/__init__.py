"""Concrete models: finite group actions (:mod:`.groups`), the Cuntz algebra
(:mod:`.cuntz`) and operator-valued semicircular systems (:mod:`.semicircular`)."""
