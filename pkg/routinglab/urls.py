"""
URL configuration for routinglab.

Only the admin site is exposed; it is used to browse recorded experiment runs.
"""
from django.contrib import admin
from django.urls import path

urlpatterns = [
    path('admin/', admin.site.urls),
]
