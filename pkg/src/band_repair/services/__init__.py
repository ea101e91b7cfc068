# Services layer: run configuration, manifests and experiment drivers used by the CLI
