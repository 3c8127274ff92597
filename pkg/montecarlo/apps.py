from django.apps import AppConfig


class MonteCarloConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'montecarlo'
    verbose_name = 'Population Monte Carlo'
