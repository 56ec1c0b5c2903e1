from django.apps import AppConfig


class ShortrangeConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'shortrange'
    verbose_name = 'Short-range landmark hierarchy'
