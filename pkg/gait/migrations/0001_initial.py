# Generated by Django 6.0 on 2026-10-18 09:12

import django.core.validators
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='SimulatedDataset',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('name', models.CharField(max_length=255)),
                ('root', models.CharField(help_text='Directory holding the IQ files', max_length=1024)),
                ('manifest_path', models.CharField(max_length=1024)),
                ('seed', models.BigIntegerField()),
                ('subjects', models.PositiveIntegerField(validators=[django.core.validators.MinValueValidator(1)])),
                ('runs_per_class', models.PositiveIntegerField(validators=[django.core.validators.MinValueValidator(1)])),
                ('recording_count', models.PositiveIntegerField(default=0)),
                ('noise_snr', models.FloatField(blank=True, help_text='Noise level in dB, empty when noiseless', null=True)),
                ('config_hash', models.CharField(max_length=64)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'verbose_name': 'Simulated Dataset',
                'verbose_name_plural': 'Simulated Datasets',
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='SubspaceModelFile',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('path', models.CharField(max_length=1024, unique=True)),
                ('representation', models.CharField(max_length=32)),
                ('p', models.PositiveIntegerField(help_text='Vectorized image length')),
                ('d', models.PositiveIntegerField(help_text='Number of training images')),
                ('n_components', models.PositiveIntegerField(validators=[django.core.validators.MinValueValidator(1)])),
                ('centered', models.BooleanField(default=True)),
                ('explained_variance', models.FloatField(default=0.0, help_text='Share of training variance kept by all components', validators=[django.core.validators.MinValueValidator(0.0), django.core.validators.MaxValueValidator(1.0)])),
                ('config_hash', models.CharField(max_length=64)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'verbose_name': 'Subspace Model',
                'verbose_name_plural': 'Subspace Models',
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='EvaluationRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('manifest_path', models.CharField(max_length=1024)),
                ('feature_set', models.CharField(max_length=16)),
                ('scheme', models.CharField(choices=[('kfold', 'Stratified k-fold'), ('loso', 'Leave one subject out')], default='kfold', max_length=10)),
                ('direction', models.CharField(choices=[('pooled', 'Pooled'), ('toward', 'Toward'), ('away', 'Away')], default='pooled', max_length=10)),
                ('kappa', models.PositiveIntegerField(default=1, validators=[django.core.validators.MinValueValidator(1)])),
                ('n_components', models.PositiveIntegerField(blank=True, help_text='λ, for PCA features only', null=True)),
                ('config_hash', models.CharField(max_length=64)),
                ('status', models.CharField(choices=[('pending', 'Pending'), ('running', 'Running'), ('completed', 'Completed'), ('failed', 'Failed')], default='pending', max_length=20)),
                ('accuracy', models.FloatField(blank=True, null=True)),
                ('fpr', models.FloatField(blank=True, null=True)),
                ('fnr', models.FloatField(blank=True, null=True)),
                ('tpr', models.FloatField(blank=True, null=True)),
                ('ci95_halfwidth', models.FloatField(blank=True, null=True)),
                ('report_path', models.CharField(blank=True, max_length=1024)),
                ('passed', models.BooleanField(blank=True, help_text='Acceptance thresholds met; empty when none set', null=True)),
                ('error_message', models.TextField(blank=True, null=True)),
                ('started_at', models.DateTimeField(auto_now_add=True)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'verbose_name': 'Evaluation Run',
                'verbose_name_plural': 'Evaluation Runs',
                'ordering': ['-started_at'],
            },
        ),
    ]
