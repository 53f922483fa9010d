from django.apps import AppConfig


class PropagationConfig(AppConfig):
    name = 'propagation'
    verbose_name = 'Angular-spectrum propagation'
