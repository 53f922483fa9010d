from django.apps import AppConfig


class WavefieldConfig(AppConfig):
    name = 'wavefield'
    verbose_name = 'Sampled complex fields'
