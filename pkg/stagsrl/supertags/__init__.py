# Dependency supertags: representation, extraction and sidecar files
