"""
Celery configuration for GaitRadar
Optional: distributes per-recording pipeline work across workers
"""
import os
from celery import Celery

# Set default Django settings module
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'gaitradar_project.settings')

app = Celery('gaitradar_project')

# Load config from Django settings with 'CELERY_' prefix
app.config_from_object('django.conf:settings', namespace='CELERY')

app.autodiscover_tasks()
