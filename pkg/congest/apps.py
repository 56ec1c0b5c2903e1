from django.apps import AppConfig


class CongestConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'congest'
    verbose_name = 'CONGEST round simulator'
