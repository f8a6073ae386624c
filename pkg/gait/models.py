from django.core.validators import MaxValueValidator, MinValueValidator
from django.db import models


class SimulatedDataset(models.Model):
    """Synthetic corpus written by the simulate command"""
    name = models.CharField(max_length=255)
    root = models.CharField(max_length=1024, help_text="Directory holding the IQ files")
    manifest_path = models.CharField(max_length=1024)
    seed = models.BigIntegerField()
    subjects = models.PositiveIntegerField(validators=[MinValueValidator(1)])
    runs_per_class = models.PositiveIntegerField(validators=[MinValueValidator(1)])
    recording_count = models.PositiveIntegerField(default=0)
    noise_snr = models.FloatField(null=True, blank=True, help_text="Noise level in dB, empty when noiseless")
    config_hash = models.CharField(max_length=64)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at']
        verbose_name = "Simulated Dataset"
        verbose_name_plural = "Simulated Datasets"

    def __str__(self):
        return f"{self.name} ({self.recording_count} recordings, seed {self.seed})"


class SubspaceModelFile(models.Model):
    """PCA model persisted by fit_pca"""
    path = models.CharField(max_length=1024, unique=True)
    representation = models.CharField(max_length=32)
    p = models.PositiveIntegerField(help_text="Vectorized image length")
    d = models.PositiveIntegerField(help_text="Number of training images")
    n_components = models.PositiveIntegerField(validators=[MinValueValidator(1)])
    centered = models.BooleanField(default=True)
    explained_variance = models.FloatField(
        validators=[MinValueValidator(0.0), MaxValueValidator(1.0)], default=0.0,
        help_text="Share of training variance kept by all components",
    )
    config_hash = models.CharField(max_length=64)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at']
        verbose_name = "Subspace Model"
        verbose_name_plural = "Subspace Models"

    def __str__(self):
        return f"{self.representation} λ={self.n_components} ({self.path})"


class EvaluationRun(models.Model):
    """One cross-validated evaluation"""
    STATUS_CHOICES = [
        ('pending', 'Pending'),
        ('running', 'Running'),
        ('completed', 'Completed'),
        ('failed', 'Failed'),
    ]
    SCHEME_CHOICES = [
        ('kfold', 'Stratified k-fold'),
        ('loso', 'Leave one subject out'),
    ]
    DIRECTION_CHOICES = [
        ('pooled', 'Pooled'),
        ('toward', 'Toward'),
        ('away', 'Away'),
    ]

    manifest_path = models.CharField(max_length=1024)
    feature_set = models.CharField(max_length=16)
    scheme = models.CharField(max_length=10, choices=SCHEME_CHOICES, default='kfold')
    direction = models.CharField(max_length=10, choices=DIRECTION_CHOICES, default='pooled')
    kappa = models.PositiveIntegerField(validators=[MinValueValidator(1)], default=1)
    n_components = models.PositiveIntegerField(null=True, blank=True, help_text="λ, for PCA features only")
    config_hash = models.CharField(max_length=64)
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default='pending')
    accuracy = models.FloatField(null=True, blank=True)
    fpr = models.FloatField(null=True, blank=True)
    fnr = models.FloatField(null=True, blank=True)
    tpr = models.FloatField(null=True, blank=True)
    ci95_halfwidth = models.FloatField(null=True, blank=True)
    report_path = models.CharField(max_length=1024, blank=True)
    passed = models.BooleanField(null=True, blank=True, help_text="Acceptance thresholds met; empty when none set")
    error_message = models.TextField(blank=True, null=True)
    started_at = models.DateTimeField(auto_now_add=True)
    finished_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ['-started_at']
        verbose_name = "Evaluation Run"
        verbose_name_plural = "Evaluation Runs"

    def __str__(self):
        return f"{self.feature_set} {self.scheme}/{self.direction} - {self.status}"
